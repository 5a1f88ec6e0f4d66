"""Local consent-banner sites for end-to-end capture tests.

Every scenario is served on its own loopback address so that the tracker host
(127.0.0.3) is a different registrable domain from each site. Cookie values
carry the path that set them; every request is logged with its client view.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, Optional, Tuple
from urllib.parse import urlsplit

TRACKER_IP = "127.0.0.3"

SCENARIOS: Dict[str, str] = {
    "127.0.0.11": "clean",
    "127.0.0.12": "pre-consent-cookie",
    "127.0.0.13": "fake-opt-out",
    "127.0.0.14": "multi-click-reject",
    "127.0.0.15": "paywall",
    "127.0.0.16": "badge-revocation",
}

# Verdicts each scenario is built to trigger; every other rule must come out not triggered.
SEEDED: Dict[str, Tuple[str, ...]] = {
    "clean": (),
    "pre-consent-cookie": ("DP16", "DP18"),
    "fake-opt-out": ("DP10", "DP18"),
    "multi-click-reject": ("DP2", "DP5", "DP15", "DP19"),
    "paywall": ("DP1", "DP2", "DP13", "DP19"),
    "badge-revocation": (),
}

YEAR = 365 * 86400

BASE_TEXT = (
    "We use cookies. Cookies are small text files on your device. "
    "We use them to analyze website traffic and to show relevant ads. "
    "We process your data based on your consent under the GDPR. "
)

PAGE = """<!doctype html>
<html lang="en"><head><meta charset="utf-8"><title>{title}</title>
<style>
body {{ margin: 0; font-family: sans-serif; background: #ffffff; color: #222222; }}
main {{ padding: 24px; height: 1800px; }}
footer {{ padding: 24px; background: #eeeeee; }}
.layer {{ position: fixed; left: 0; right: 0; bottom: 0; z-index: 10000; background: #f2f2f2;
          padding: 16px 24px; font-size: 15px; }}
.btn {{ display: inline-block; margin: 8px 8px 0 0; padding: 10px 18px; border: 0;
        background: #1a4f8b; color: #ffffff; font-size: 15px; }}
#badge {{ position: fixed; left: 12px; bottom: 12px; width: 48px; height: 48px; z-index: 9000;
          background: #7a3e00; color: #ffffff; border-radius: 24px; border: 0; font-size: 22px; }}
</style></head>
<body>
<main><h1>{title}</h1><p>Daily news and stories from our town.</p></main>
<footer>{footer}</footer>
<div id="cookie-banner" class="layer" role="dialog" style="display:none">
  <p>{text}</p>
  {buttons}
</div>
<div id="cookie-prefs" class="layer" role="dialog" style="display:none">
  <p>Cookie preferences. Choose which cookies we may use. We use them to analyze website traffic.</p>
  <label><input type="checkbox" role="switch" checked disabled> Strictly necessary</label><br>
  <label><input type="checkbox" role="switch" id="t-analytics"> Analytics</label><br>
  <label><input type="checkbox" role="switch" id="t-marketing" {marketing}> Marketing</label><br>
  {pref_buttons}
</div>
{badge}
<script>
const TRACKER = "{tracker}";
function hide(id) {{ document.getElementById(id).style.display = "none"; }}
function show(id) {{ document.getElementById(id).style.display = "block"; }}
function pixel() {{ const i = new Image(); i.src = TRACKER + "/pixel?from=" + location.host; document.body.appendChild(i); }}
function decided() {{ hide("cookie-banner"); hide("cookie-prefs"); const b = document.getElementById("badge"); if (b) b.style.display = "block"; }}
function accept() {{ fetch("/consent/accept").then(() => {{ pixel(); decided(); }}); }}
function reject() {{ localStorage.setItem("choice", "reject"); {on_reject} decided(); }}
function save() {{
  const on = document.getElementById("t-analytics").checked || document.getElementById("t-marketing").checked;
  if (on) {{ accept(); }} else {{ reject(); }}
}}
function openPrefs() {{ hide("cookie-banner"); show("cookie-prefs"); }}
window.addEventListener("load", () => {{
  show("cookie-banner");
  {on_load}
  setTimeout(() => fetch("/late"), {late_ms});
}});
</script>
</body></html>
"""

PRIVACY = """<!doctype html><html><head><title>Privacy policy</title></head><body>
<h1>Privacy policy</h1><p>We process personal data under GDPR Article 6 (1)(a) with your consent.</p>
</body></html>"""


@dataclass(frozen=True)
class Scenario:
    name: str
    text: str
    buttons: str
    footer: str = ""
    badge: bool = False
    marketing_on: bool = False
    on_reject: str = ""
    on_load: str = ""
    pref_buttons: str = (
        '<button class="btn" onclick="reject()">Reject all</button>'
        '<button class="btn" onclick="save()">Save settings</button>'
    )


ACCEPT = '<button class="btn" onclick="accept()">Accept all</button>'
REJECT = '<button class="btn" onclick="reject()">Reject all</button>'
POLICY = '<a href="/privacy">Privacy policy</a>'
FOOTER_LINK = '<a href="#" onclick="openPrefs(); return false;">Cookie settings</a>'


def build_scenarios() -> Dict[str, Scenario]:
    withdraw = "You can withdraw consent at any time in Cookie settings at the bottom of the page."
    return {
        "clean": Scenario("clean", BASE_TEXT + withdraw, ACCEPT + REJECT + POLICY, FOOTER_LINK),
        "pre-consent-cookie": Scenario(
            "pre-consent-cookie", BASE_TEXT + withdraw, ACCEPT + REJECT + POLICY, FOOTER_LINK, on_load="pixel();"
        ),
        "fake-opt-out": Scenario(
            "fake-opt-out",
            BASE_TEXT + withdraw,
            ACCEPT + REJECT + POLICY,
            FOOTER_LINK,
            on_reject='fetch("/consent/reject"); pixel();',
        ),
        "multi-click-reject": Scenario(
            "multi-click-reject",
            BASE_TEXT + withdraw,
            ACCEPT + '<button class="btn" onclick="openPrefs()">Manage options</button>' + POLICY,
            FOOTER_LINK,
            marketing_on=True,
            pref_buttons='<button class="btn" onclick="save()">Save settings</button>',
        ),
        "paywall": Scenario(
            "paywall",
            BASE_TEXT + "Accept cookies, or subscribe for 2.99 € per month to read without ads. " + withdraw,
            ACCEPT + '<a class="btn" href="/subscribe">Subscribe</a>' + POLICY,
            FOOTER_LINK,
        ),
        "badge-revocation": Scenario(
            "badge-revocation",
            BASE_TEXT + "You can withdraw consent at any time with the cookie icon in the corner.",
            ACCEPT + REJECT + POLICY,
            badge=True,
        ),
    }


@dataclass
class LoggedRequest:
    host: str
    path: str
    cookies: str
    at: float


@dataclass
class FixtureState:
    late_ms: int
    port: int = 0
    requests: List[LoggedRequest] = field(default_factory=list)
    set_cookies: List[Tuple[str, str, str]] = field(default_factory=list)  # (host, set-path, name)
    lock: threading.Lock = field(default_factory=threading.Lock)


class Handler(BaseHTTPRequestHandler):
    server: "FixtureServer"

    def log_message(self, *args) -> None:  # keep test output quiet
        pass

    def _host(self) -> str:
        return (self.headers.get("Host") or "").split(":")[0]

    def _cookie(self, name: str, set_path: str, max_age: Optional[int], third_party: bool = False) -> str:
        tag = set_path.strip("/").replace("/", "-") or "root"
        value = f"{tag}.{secrets.token_urlsafe(24)}"
        parts = [f"{name}={value}", "Path=/"]
        if max_age is not None:
            parts.append(f"Max-Age={max_age}")
        if third_party:
            parts += ["SameSite=None", "Secure"]
        else:
            parts.append("SameSite=Lax")
        with self.server.state.lock:
            self.server.state.set_cookies.append((self._host(), set_path, name))
        return "; ".join(parts)

    def _send(self, status: int, body: bytes, ctype: str, cookies: List[str] = ()) -> None:
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        for c in cookies:
            self.send_header("Set-Cookie", c)
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802
        host = self._host()
        path = urlsplit(self.path).path
        with self.server.state.lock:
            self.server.state.requests.append(LoggedRequest(host, self.path, self.headers.get("Cookie", ""), time.time()))
        if path == "/robots.txt":
            self._send(200, b"User-agent: *\nDisallow: /private/\n", "text/plain")
            return
        if host == TRACKER_IP:
            if path == "/pixel":
                gif = bytes.fromhex("47494638396101000100800000000000ffffff21f90401000000002c00000000010001000002024401003b")
                self._send(200, gif, "image/gif", [self._cookie("tid", "/pixel", YEAR, third_party=True)])
            else:
                self._send(404, b"", "text/plain")
            return
        scenario_name = SCENARIOS.get(host)
        if scenario_name is None:
            self._send(404, b"unknown host", "text/plain")
            return
        sc = self.server.scenarios[scenario_name]
        if path == "/":
            body = PAGE.format(
                title=sc.name,
                text=sc.text,
                buttons=sc.buttons,
                footer=sc.footer,
                marketing="checked" if sc.marketing_on else "",
                pref_buttons=sc.pref_buttons,
                badge='<button id="badge" aria-label="Privacy center" onclick="openPrefs()" style="display:none">&#127850;</button>'
                if sc.badge
                else "",
                tracker=f"http://{TRACKER_IP}:{self.server.state.port}",
                on_reject=sc.on_reject,
                on_load=sc.on_load,
                late_ms=self.server.state.late_ms,
            ).encode()
            self._send(200, body, "text/html; charset=utf-8", [self._cookie("sess", "/", None)])
        elif path == "/privacy":
            self._send(200, PRIVACY.encode(), "text/html; charset=utf-8")
        elif path == "/consent/accept":
            self._send(200, b"ok", "text/plain", [self._cookie("consent", "/consent/accept", YEAR)])
        elif path == "/consent/reject":
            self._send(200, b"ok", "text/plain", [self._cookie("optout", "/consent/reject", YEAR)])
        elif path == "/late":
            self._send(200, b"ok", "text/plain", [self._cookie("late", "/late", None)])
        else:
            self._send(404, b"not found", "text/plain")


class FixtureServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, late_ms: int, port: int = 0):
        super().__init__(("", port), Handler)
        self.state = FixtureState(late_ms=late_ms, port=self.server_address[1])
        self.scenarios = build_scenarios()

    def site_urls(self) -> Dict[str, str]:
        return {name: f"http://{ip}:{self.state.port}/" for ip, name in SCENARIOS.items()}

    def start(self) -> threading.Thread:
        t = threading.Thread(target=self.serve_forever, daemon=True)
        t.start()
        return t
