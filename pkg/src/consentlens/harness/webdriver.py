"""Minimal W3C WebDriver client over HTTP/JSON."""

from __future__ import annotations

import base64
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import requests

log = logging.getLogger(__name__)

ELEMENT_KEY = "element-6066-11e4-a52e-4f735466cecf"


class WebDriverError(RuntimeError):
    def __init__(self, status: int, error: str, message: str):
        super().__init__(f"{error} ({status}): {message}")
        self.status = status
        self.error = error
        self.message = message


class SessionLost(WebDriverError):
    """The browser session is gone; the caller may retry with a new one."""


class NoSuchElement(WebDriverError):
    pass


@dataclass(frozen=True)
class Element:
    id: str

    def to_json(self) -> Dict[str, str]:
        return {ELEMENT_KEY: self.id}


def _wrap(value: Any) -> Any:
    if isinstance(value, dict) and ELEMENT_KEY in value:
        return Element(value[ELEMENT_KEY])
    if isinstance(value, list):
        return [_wrap(v) for v in value]
    if isinstance(value, dict):
        return {k: _wrap(v) for k, v in value.items()}
    return value


def _unwrap(value: Any) -> Any:
    if isinstance(value, Element):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [_unwrap(v) for v in value]
    if isinstance(value, dict):
        return {k: _unwrap(v) for k, v in value.items()}
    return value


class WebDriverClient:
    def __init__(self, endpoint: str, timeout: float = 90.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.http = requests.Session()
        self.http.trust_env = False  # never route loopback driver traffic through a proxy

    def request(self, method: str, path: str, payload: Optional[dict] = None, timeout: Optional[float] = None) -> Any:
        url = f"{self.endpoint}{path}"
        try:
            resp = self.http.request(method, url, json=payload, timeout=timeout or self.timeout)
        except requests.RequestException as exc:
            raise SessionLost(0, "connection failed", str(exc)) from exc
        try:
            body = resp.json()
        except ValueError:
            raise WebDriverError(resp.status_code, "invalid response", resp.text[:200]) from None
        value = body.get("value") if isinstance(body, dict) else None
        if resp.status_code >= 400 or (isinstance(value, dict) and "error" in value and resp.status_code != 200):
            err = value.get("error", "unknown error") if isinstance(value, dict) else "unknown error"
            msg = value.get("message", "") if isinstance(value, dict) else ""
            if err in ("invalid session id", "session not created") or "disconnected" in msg:
                raise SessionLost(resp.status_code, err, msg)
            if err == "no such element":
                raise NoSuchElement(resp.status_code, err, msg)
            raise WebDriverError(resp.status_code, err, msg)
        return _wrap(value)

    def status(self) -> dict:
        return self.request("GET", "/status", timeout=10)

    def new_session(self, capabilities: dict) -> "Session":
        value = self.request("POST", "/session", {"capabilities": capabilities})
        return Session(self, value["sessionId"], value.get("capabilities", {}))


class Session:
    def __init__(self, client: WebDriverClient, session_id: str, capabilities: dict):
        self.client = client
        self.id = session_id
        self.capabilities = capabilities
        self._cdp_ok: Optional[bool] = None

    def _cmd(self, method: str, path: str, payload: Optional[dict] = None, timeout: Optional[float] = None) -> Any:
        return self.client.request(method, f"/session/{self.id}{path}", payload, timeout)

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.quit()

    def quit(self) -> None:
        try:
            self._cmd("DELETE", "", timeout=30)
        except WebDriverError as exc:
            log.debug("session delete failed: %s", exc)

    def set_timeouts(self, page_load_ms: int, script_ms: int = 30_000, implicit_ms: int = 0) -> None:
        self._cmd("POST", "/timeouts", {"pageLoad": page_load_ms, "script": script_ms, "implicit": implicit_ms})

    def set_window_rect(self, width: int, height: int) -> None:
        self._cmd("POST", "/window/rect", {"width": width, "height": height})

    def navigate(self, url: str) -> None:
        self._cmd("POST", "/url", {"url": url})

    def current_url(self) -> str:
        return self._cmd("GET", "/url")

    def execute(self, script: str, *args: Any) -> Any:
        return self._cmd("POST", "/execute/sync", {"script": script, "args": _unwrap(list(args))})

    def find_elements(self, xpath: str) -> List[Element]:
        return self._cmd("POST", "/elements", {"using": "xpath", "value": xpath})

    def find_element(self, xpath: str) -> Element:
        return self._cmd("POST", "/element", {"using": "xpath", "value": xpath})

    def click(self, element: Element) -> None:
        self._cmd("POST", f"/element/{element.id}/click", {})

    def screenshot_png(self) -> bytes:
        return base64.b64decode(self._cmd("GET", "/screenshot"))

    def switch_frame(self, target: Optional[Element]) -> None:
        self._cmd("POST", "/frame", {"id": None if target is None else target.to_json()})

    def switch_parent(self) -> None:
        self._cmd("POST", "/frame/parent", {})

    def get_cookies(self) -> List[dict]:
        return self._cmd("GET", "/cookie")

    def cdp(self, cmd: str, params: Optional[dict] = None) -> Optional[dict]:
        """Chromium's vendor command passthrough; None when unsupported by the driver."""
        if self._cdp_ok is False:
            return None
        try:
            value = self._cmd("POST", "/goog/cdp/execute", {"cmd": cmd, "params": params or {}})
        except SessionLost:
            raise
        except WebDriverError as exc:
            if exc.status in (404, 405) or exc.error in ("unknown command", "unknown method"):
                self._cdp_ok = False
                return None
            raise
        self._cdp_ok = True
        return value
