"""robots.txt evaluation with longest-match semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
from urllib.parse import urlsplit

import requests

# A fetcher returns (status, body) for a URL, or raises on network failure.
Fetcher = Callable[[str], Tuple[int, str]]


@dataclass
class RobotsGroup:
    agents: List[str] = field(default_factory=list)
    rules: List[Tuple[bool, str]] = field(default_factory=list)  # (allow, pattern)


def parse_robots(text: str) -> List[RobotsGroup]:
    groups: List[RobotsGroup] = []
    current: Optional[RobotsGroup] = None
    last_was_agent = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if ":" not in line:
            continue
        key, value = (part.strip() for part in line.split(":", 1))
        key = key.lower()
        if key == "user-agent":
            if current is None or not last_was_agent:
                current = RobotsGroup()
                groups.append(current)
            current.agents.append(value.lower())
            last_was_agent = True
        elif key in ("allow", "disallow") and current is not None:
            last_was_agent = False
            if key == "disallow" and not value:
                continue  # empty Disallow allows everything
            current.rules.append((key == "allow", value))
        else:
            last_was_agent = False
    return groups


def _pattern_regex(pattern: str) -> "re.Pattern[str]":
    anchored = pattern.endswith("$")
    body = pattern[:-1] if anchored else pattern
    rx = "".join(".*" if ch == "*" else re.escape(ch) for ch in body)
    return re.compile(rx + ("$" if anchored else ""))


def is_allowed(groups: List[RobotsGroup], agent: str, path: str) -> bool:
    agent = agent.lower()
    chosen = [g for g in groups if any(a != "*" and a in agent for a in g.agents)]
    if not chosen:
        chosen = [g for g in groups if "*" in g.agents]
    rules = [r for g in chosen for r in g.rules]
    best: Optional[Tuple[int, bool]] = None
    for allow, pattern in rules:
        if _pattern_regex(pattern).match(path):
            length = len(pattern)
            # longest pattern wins; Allow wins ties
            if best is None or length > best[0] or (length == best[0] and allow):
                best = (length, allow)
    return True if best is None else best[1]


def requests_fetcher(timeout: float = 10.0) -> Fetcher:
    http = requests.Session()
    http.trust_env = False

    def fetch(url: str) -> Tuple[int, str]:
        resp = http.get(url, timeout=timeout)
        return resp.status_code, resp.text

    return fetch


@dataclass(frozen=True)
class RobotsResult:
    allowed: bool
    note: Optional[str] = None


def check_robots(url: str, fetcher: Optional[Fetcher] = None, agent: str = "consentlens") -> RobotsResult:
    parts = urlsplit(url)
    if not parts.hostname:
        raise ValueError(f"url {url!r} has no host")
    robots_url = f"{parts.scheme}://{parts.netloc}/robots.txt"
    fetcher = fetcher or requests_fetcher()
    try:
        status, body = fetcher(robots_url)
    except Exception as exc:  # network errors degrade to the permissive default
        return RobotsResult(True, f"robots.txt fetch failed: {exc}")
    if status >= 400:
        return RobotsResult(True, f"robots.txt returned HTTP {status}")
    path = parts.path or "/"
    if parts.query:
        path += "?" + parts.query
    return RobotsResult(is_allowed(parse_robots(body), agent, path))
