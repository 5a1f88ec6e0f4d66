"""Browser capture: four isolated stage contexts, click-path search, revocation discovery."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple
from urllib.parse import urldefrag, urljoin, urlsplit

from ..clickables import Category
from ..dialog import Extraction, extract_dialog
from ..model import (
    CookieRecord,
    CrawlRecord,
    DomNode,
    InteractionEvent,
    Position,
    RenderBox,
    RevocationInfo,
    RevocationSource,
    SameSite,
    Screenshot,
    Stage,
    StageCapture,
    StyleSubset,
    Subpage,
)
from ..rules import Lexicons
from ..text import LexiconSet, detect_language, match_lexicon, normalize
from ..dom import keywords
from ..visual import detect_corner_badge
from .clickpath import Action, SearchResult, UIState, actions_from_clickables, shortest_path, state_key
from .robots import Fetcher, check_robots
from .webdriver import Session, WebDriverClient, WebDriverError

log = logging.getLogger(__name__)

FRAME_SEP = " >> "

DEFAULT_ARGS = ("--headless=new", "--window-size=1366,768", "--disable-dev-shm-usage")


def default_capabilities() -> Dict[str, Any]:
    """Capabilities from CONSENTLENS_CAPABILITIES (JSON) or a headless Chrome default."""
    raw = os.environ.get("CONSENTLENS_CAPABILITIES")
    if raw:
        return json.loads(raw)
    opts: Dict[str, Any] = {"args": list(DEFAULT_ARGS)}
    binary = os.environ.get("CONSENTLENS_BROWSER_BINARY")
    if binary:
        opts["binary"] = binary
    return {"alwaysMatch": {"browserName": "chrome", "goog:chromeOptions": opts}}


@dataclass
class CaptureConfig:
    webdriver_url: str = "http://127.0.0.1:9515"
    capabilities: Dict[str, Any] = field(default_factory=default_capabilities)
    settle_seconds: float = 30.0
    ui_settle_seconds: float = 1.0
    page_load_timeout: float = 60.0
    max_click_depth: int = 4
    respect_robots: bool = True
    robots_agent: str = "consentlens"
    iframe_depth: int = 3
    subpage_cap: int = 5
    max_nodes: int = 20000
    selector_list: Optional[Sequence[str]] = None
    keyword_map: Optional[LexiconSet] = None
    robots_fetcher: Optional[Fetcher] = None
    clock: Callable[[], float] = time.time
    sleep: Callable[[float], None] = time.sleep


# -- DOM serialization --------------------------------------------------------------

SNAPSHOT_JS = r"""
const MAX = arguments[0];
let count = 0;
const SKIP = new Set(['SCRIPT', 'STYLE', 'NOSCRIPT', 'TEMPLATE', 'META', 'LINK', 'HEAD']);
const HTML_NS = 'http://www.w3.org/1999/xhtml';
function step(el) {
  const html = el.namespaceURI === HTML_NS;
  const name = el.localName;
  let i = 1;
  for (let s = el.previousElementSibling; s; s = s.previousElementSibling) {
    if (s.localName === name && (s.namespaceURI === HTML_NS) === html) i++;
  }
  return (html ? name : "*[local-name()='" + name + "']") + '[' + i + ']';
}
function xp(el) {
  const parts = [];
  for (; el && el.nodeType === 1; el = el.parentElement) parts.unshift(step(el));
  return '/' + parts.join('/');
}
function rgb(s) {
  const m = s && s.match(/rgba?\(([^)]+)\)/);
  if (!m) return null;
  const p = m[1].split(/[\s,\/]+/).filter(Boolean).map(Number);
  if (p.length > 3 && p[3] === 0) return null;
  return [Math.round(p[0]), Math.round(p[1]), Math.round(p[2])];
}
function ser(el, inShadow) {
  if (++count > MAX) return null;
  const cs = getComputedStyle(el);
  const r = el.getBoundingClientRect();
  const attrs = [];
  for (const a of el.attributes) attrs.push([a.name, a.value]);
  const tag = el.localName;
  if (tag === 'input' && (el.type === 'checkbox' || el.type === 'radio')) {
    // live state, not the initial markup attribute
    const i = attrs.findIndex(a => a[0] === 'checked');
    if (i >= 0) attrs.splice(i, 1);
    if (el.checked) attrs.push(['checked', '']);
  }
  let text = '';
  for (const c of el.childNodes) if (c.nodeType === 3) text += c.nodeValue;
  const kids = [];
  const sources = [[el.children, inShadow]];
  // open shadow roots are flattened into the host; their nodes have no XPath address
  if (el.shadowRoot) sources.push([el.shadowRoot.children, true]);
  for (const [list, shadow] of sources) {
    for (const c of list) {
      if (SKIP.has(c.tagName.toUpperCase())) continue;
      const k = ser(c, shadow);
      if (k) kids.push(k);
    }
  }
  const z = parseInt(cs.zIndex, 10);
  return {
    t: tag, a: attrs, x: text.replace(/\s+/g, ' ').trim(), c: kids,
    s: {z: isNaN(z) ? null : z, p: cs.position, dn: cs.display === 'none',
        vh: cs.visibility !== 'visible', bg: rgb(cs.backgroundColor), fg: rgb(cs.color)},
    b: [r.left, r.top, Math.max(0, r.width), Math.max(0, r.height)], l: inShadow ? null : xp(el)
  };
}
const frames = [];
for (const f of document.querySelectorAll('iframe, frame')) {
  const r = f.getBoundingClientRect();
  if (r.width > 0 && r.height > 0) frames.push({l: xp(f), b: [r.left, r.top, r.width, r.height]});
}
return {root: ser(document.documentElement, false), frames: frames, url: location.href,
        vw: window.innerWidth, vh: window.innerHeight, truncated: count > MAX};
"""

STATUS_JS = """
const e = performance.getEntriesByType('navigation')[0];
return e && e.responseStatus ? e.responseStatus : 0;
"""

TEXT_JS = "return document.body ? document.body.innerText : '';"

_POSITIONS = {p.value: p for p in Position}


def _rgb(v) -> Optional[Tuple[int, int, int]]:
    if not v:
        return None
    return tuple(max(0, min(255, int(c))) for c in v[:3])  # type: ignore[return-value]


def dom_from_snapshot(doc: Dict[str, Any], frame_id: int = 0, offset: Tuple[float, float] = (0.0, 0.0), prefix: str = "") -> DomNode:
    """Convert the serializer's JSON into DomNodes, shifting boxes into top-level viewport space."""
    dx, dy = offset

    def conv(d: Dict[str, Any]) -> DomNode:
        s = d.get("s") or {}
        z = s.get("z")
        style = StyleSubset(
            z_index=None if z is None else int(z),
            position=_POSITIONS.get(s.get("p", "static"), Position.STATIC),
            display_none=bool(s.get("dn")),
            visibility_hidden=bool(s.get("vh")),
            background_rgb=_rgb(s.get("bg")),
            color_rgb=_rgb(s.get("fg")),
        )
        b = d.get("b")
        box = RenderBox(b[0] + dx, b[1] + dy, b[2], b[3]) if b else None
        return DomNode(
            tag=d["t"],
            attributes=tuple((str(k), str(v)) for k, v in d.get("a", [])),
            text=d.get("x", ""),
            children=tuple(conv(c) for c in d.get("c", [])),
            style=style,
            box=box,
            frame_id=frame_id,
            locator=prefix + d["l"] if d.get("l") else None,
        )

    return conv(doc)


@dataclass
class PageSnapshot:
    dom: DomNode
    frames: Tuple[DomNode, ...]
    screenshot: Screenshot
    url: str
    notes: Tuple[str, ...] = ()

    def forest(self) -> List[DomNode]:
        return [self.dom, *self.frames]


def enumerate_iframes(session: Session, frames: Sequence[Dict[str, Any]], depth: int, cfg: CaptureConfig,
                      prefix: str = "", origin: Tuple[float, float] = (0.0, 0.0), counter: Optional[List[int]] = None) -> List[DomNode]:
    """Snapshot nested frames depth-first; leaves the session in the frame it started in."""
    counter = counter if counter is not None else [0]
    out: List[DomNode] = []
    if depth <= 0:
        return out
    for f in frames:
        try:
            el = session.find_element(f["l"])
            session.switch_frame(el)
        except WebDriverError as exc:
            log.debug("frame %s unavailable: %s", f["l"], exc)
            continue
        try:
            snap = session.execute(SNAPSHOT_JS, cfg.max_nodes)
            counter[0] += 1
            fid = counter[0]
            off = (origin[0] + f["b"][0], origin[1] + f["b"][1])
            fprefix = prefix + f["l"] + FRAME_SEP
            if snap and snap.get("root"):
                out.append(dom_from_snapshot(snap["root"], fid, off, fprefix))
                out.extend(enumerate_iframes(session, snap.get("frames", []), depth - 1, cfg, fprefix, off, counter))
        except WebDriverError as exc:
            log.debug("frame snapshot failed: %s", exc)
        finally:
            session.switch_parent()
    return out


def snapshot_page(session: Session, cfg: CaptureConfig) -> PageSnapshot:
    session.switch_frame(None)
    snap = session.execute(SNAPSHOT_JS, cfg.max_nodes)
    dom = dom_from_snapshot(snap["root"])
    frames = tuple(enumerate_iframes(session, snap.get("frames", []), cfg.iframe_depth, cfg))
    shot = Screenshot.from_png(session.screenshot_png())
    notes = ("dom truncated",) if snap.get("truncated") else ()
    return PageSnapshot(dom, frames, shot, snap.get("url", ""), notes)


# -- cookies ------------------------------------------------------------------------

_SAMESITE = {"strict": SameSite.STRICT, "lax": SameSite.LAX, "none": SameSite.NONE}


def cookie_from_browser(c: Dict[str, Any], stage: Stage, fallback_host: str = "") -> CookieRecord:
    expires = c.get("expires", c.get("expiry"))
    session_cookie = c.get("session", False) or expires is None or float(expires) < 0
    host = (c.get("domain") or fallback_host).lower()
    return CookieRecord(
        name=c["name"],
        value=str(c.get("value", "")),
        host=host,
        path=c.get("path") or "/",
        secure=bool(c.get("secure")),
        http_only=bool(c.get("httpOnly")),
        same_site=_SAMESITE.get(str(c.get("sameSite", "")).lower(), SameSite.UNSET),
        expiry=None if session_cookie else int(float(expires)),
        observed_stage=stage,
    )


def read_cookies(session: Session, stage: Stage) -> Tuple[CookieRecord, ...]:
    """Full browser jar through the DevTools bridge, else the W3C per-document view."""
    raw = None
    for cmd in ("Storage.getCookies", "Network.getAllCookies"):
        try:
            value = session.cdp(cmd)
        except WebDriverError:
            value = None
        if value is not None and "cookies" in value:
            raw = value["cookies"]
            break
    fallback_host = ""
    if raw is None:
        session.switch_frame(None)
        fallback_host = urlsplit(session.current_url()).hostname or ""
        raw = session.get_cookies()
    jar: Dict[Tuple[str, str, str], CookieRecord] = {}
    for c in raw:
        if not c.get("name") and not c.get("value"):
            continue
        rec = cookie_from_browser(c, stage, fallback_host)
        if rec.name and rec.host:
            jar[rec.key] = rec
    return tuple(sorted(jar.values(), key=lambda r: r.key))


# -- interaction -----------------------------------------------------------------------


def _enter_frames(session: Session, locator: str) -> str:
    session.switch_frame(None)
    *frames, target = locator.split(FRAME_SEP)
    for f in frames:
        session.switch_frame(session.find_element(f))
    return target


def perform(session: Session, action: Action) -> None:
    if action.kind == "point":
        session.switch_frame(None)
        x, y = action.point  # type: ignore[misc]
        session.execute("const e = document.elementFromPoint(arguments[0], arguments[1]); if (e) e.click();", x, y)
        return
    target = _enter_frames(session, action.locator)
    el = session.find_element(target)
    if action.kind == "scroll":
        session.execute("arguments[0].scrollIntoView({block: 'center'});", el)
    else:
        try:
            session.click(el)
        except WebDriverError:
            # hidden inputs behind custom switches refuse native clicks
            session.execute("arguments[0].click();", el)
    session.switch_frame(None)


class BrowserRun:
    """One fresh browser context (a new WebDriver session) for a single task."""

    def __init__(self, cfg: CaptureConfig, client: Optional[WebDriverClient] = None):
        self.cfg = cfg
        self.client = client or WebDriverClient(cfg.webdriver_url)
        self.session: Optional[Session] = None

    def __enter__(self) -> Session:
        self.session = self.client.new_session(self.cfg.capabilities)
        self.session.set_timeouts(page_load_ms=int(self.cfg.page_load_timeout * 1000))
        return self.session

    def __exit__(self, *exc) -> None:
        if self.session is not None:
            self.session.quit()


def load(session: Session, url: str) -> int:
    """Navigate; returns the HTTP status when the browser exposes it (0 otherwise)."""
    session.navigate(url)
    try:
        return int(session.execute(STATUS_JS) or 0)
    except WebDriverError:
        return 0


class BrowserGraph:
    """Consent UI states of one page; each probe replays its path in a fresh context."""

    def __init__(self, cfg: CaptureConfig, url: str, prefix: Sequence[Action] = (), essential: Optional[LexiconSet] = None,
                 client: Optional[WebDriverClient] = None):
        self.cfg = cfg
        self.url = url
        self.prefix = tuple(prefix)
        self.essential = essential if essential is not None else Lexicons.shipped().essential
        self.client = client or WebDriverClient(cfg.webdriver_url)

    def _state(self, session: Session) -> UIState:
        page = snapshot_page(session, self.cfg)
        ex = extract_dialog(page.forest(), page.screenshot.viewport, self.cfg.selector_list, self.cfg.keyword_map)
        if ex.active is None:
            return UIState(key=("closed",), dialog_open=False)
        actions = actions_from_clickables(ex.active.clickables, self.essential)
        toggles = [(a.label, a.toggle_on) for a in actions if a.category == Category.PREFERENCE_SLIDER.value]
        return UIState(state_key(ex.active.extracted_text, toggles), True, actions)

    def _run(self, path: Sequence[Action]) -> Optional[UIState]:
        try:
            with BrowserRun(self.cfg, self.client) as session:
                load(session, self.url)
                self.cfg.sleep(self.cfg.ui_settle_seconds)
                for action in (*self.prefix, *path):
                    perform(session, action)
                    self.cfg.sleep(self.cfg.ui_settle_seconds)
                return self._state(session)
        except WebDriverError as exc:
            log.info("probe %s failed: %s", [a.label for a in path], exc)
            return None

    def initial(self) -> Optional[UIState]:
        return self._run(())

    def step(self, path: Sequence[Action]) -> Optional[UIState]:
        return self._run(path)


# -- stages ------------------------------------------------------------------------------


def _events(stage: Stage, path: Sequence[Action]) -> Tuple[InteractionEvent, ...]:
    return tuple(
        InteractionEvent(stage, a.locator or f"point:{a.point}", a.label, i, a.kind, a.category) for i, a in enumerate(path, start=1)
    )


def capture_stage(stage: Stage, url: str, path: Sequence[Action], cfg: CaptureConfig,
                  client: Optional[WebDriverClient] = None, after: Optional[Callable[[Session], Any]] = None) -> Tuple[StageCapture, PageSnapshot, Any]:
    """Fresh context: load, replay ``path``, wait the settle period, then snapshot everything."""
    with BrowserRun(cfg, client) as session:
        load(session, url)
        if path:
            cfg.sleep(cfg.ui_settle_seconds)
            for action in path:
                perform(session, action)
                cfg.sleep(cfg.ui_settle_seconds)
        cfg.sleep(cfg.settle_seconds)
        page = snapshot_page(session, cfg)
        cookies = read_cookies(session, stage)
        cap = StageCapture(stage, page.dom, page.screenshot, cookies, int(cfg.clock()), _events(stage, path), page.frames)
        extra = after(session) if after is not None else None
    return cap, page, extra


def _policy_links(extraction: Extraction, base_url: str, cap: int) -> List[str]:
    if extraction.active is None:
        return []
    out: List[str] = []
    base = urldefrag(base_url)[0]
    for c in extraction.active.clickables:
        if c.category not in (Category.POLICY_LINK, Category.MORE_OPTIONS):
            continue
        href = c.node.attr("href")
        if not href or href.startswith(("#", "javascript:", "mailto:")):
            continue
        url = urldefrag(urljoin(base_url, href))[0]
        if urlsplit(url).scheme in ("http", "https") and url != base and url not in out:
            out.append(url)
        if len(out) >= cap:
            break
    return out


def fetch_subpages(session: Session, urls: Sequence[str]) -> Tuple[Subpage, ...]:
    """Depth-one visit of linked policy pages in the already-open session."""
    pages = []
    for url in urls:
        try:
            status = load(session, url)
            text = normalize(session.execute(TEXT_JS) or "")
            pages.append(Subpage(url, text, ok=status < 400))
        except WebDriverError as exc:
            pages.append(Subpage(url, "", ok=False))
            log.info("subpage %s failed: %s", url, exc)
    return tuple(pages)


def _xpath_literal(s: str) -> str:
    if "'" not in s:
        return f"'{s}'"
    return "concat(" + ", \"'\", ".join(f"'{p}'" for p in s.split("'")) + ")"


def revocation_xpath(phrase: str) -> str:
    upper, lower = "ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz"
    lit = _xpath_literal(phrase.lower())
    text = f"translate(normalize-space(.), '{upper}', '{lower}')"
    aria = f"translate(@aria-label, '{upper}', '{lower}')"
    return (
        "//*[self::a or self::button or @role='button' or @onclick]"
        f"[contains({text}, {lit}) or contains({aria}, {lit})]"
    )


_VISIBLE_JS = """
const r = arguments[0].getBoundingClientRect();
const cs = getComputedStyle(arguments[0]);
return {w: r.width, h: r.height, top: r.top, bottom: r.bottom, vh: window.innerHeight,
        shown: cs.display !== 'none' && cs.visibility === 'visible'};
"""


def find_revocation_entry(session: Session, phrases: Sequence[str], cfg: CaptureConfig) -> Optional[List[Action]]:
    """Keyword XPath pass over the page after consent. Returns entry actions (scroll, click)."""
    session.switch_frame(None)
    for phrase in phrases:
        for el in session.find_elements(revocation_xpath(phrase)):
            info = session.execute(_VISIBLE_JS, el)
            if not info["shown"] or info["w"] <= 0 or info["h"] <= 0:
                continue
            locator = session.execute(
                "let el = arguments[0], parts = [];"
                "for (; el && el.nodeType === 1; el = el.parentElement) {"
                "  let i = 1; for (let s = el.previousElementSibling; s; s = s.previousElementSibling) if (s.localName === el.localName) i++;"
                "  parts.unshift(el.localName + '[' + i + ']'); }"
                "return '/' + parts.join('/');",
                el,
            )
            label = normalize(session.execute("return arguments[0].innerText || arguments[0].getAttribute('aria-label') || '';", el))
            in_view = info["top"] >= 0 and info["bottom"] <= info["vh"]
            click = Action(locator, label, "Revocation")
            return [click] if in_view else [Action(locator, label, "Revocation", kind="scroll"), click]
    return None


def find_badge_entry(page: PageSnapshot) -> Optional[List[Action]]:
    found = detect_corner_badge(page.forest(), page.screenshot, page.screenshot.viewport)
    if not found:
        return None
    badge = found[0]
    if badge.node is not None and badge.node.locator:
        return [Action(badge.node.locator, "corner badge", "Revocation")]
    r = badge.region
    return [Action("", "corner badge", "Revocation", kind="point", point=(r.x + r.width / 2, r.y + r.height / 2))]


def disclosure_on_first_page(extraction: Extraction, withdrawal: LexiconSet) -> bool:
    if extraction.active is None:
        return False
    return bool(match_lexicon(extraction.active.extracted_text, withdrawal, "exact"))


def discover_revocation(url: str, opt_in_path: Sequence[Action], disclosure: bool, cfg: CaptureConfig,
                        client: Optional[WebDriverClient] = None) -> RevocationInfo:
    phrases = keywords()["revocation_phrases"]
    with BrowserRun(cfg, client) as session:
        load(session, url)
        cfg.sleep(cfg.ui_settle_seconds)
        for action in opt_in_path:
            perform(session, action)
            cfg.sleep(cfg.ui_settle_seconds)
        entry = find_revocation_entry(session, phrases, cfg)
        source = RevocationSource.KEYWORD_XPATH
        if entry is None:
            entry = find_badge_entry(snapshot_page(session, cfg))
            source = RevocationSource.CORNER_BADGE
    if entry is None:
        return RevocationInfo(RevocationSource.NOT_FOUND, None, None, disclosure)
    graph = BrowserGraph(cfg, url, prefix=(*opt_in_path, *entry), client=client)
    result = shortest_path(graph, "opt_out", cfg.max_click_depth)
    completion = len(result.path) if result.path is not None else None
    return RevocationInfo(source, len(entry), completion, disclosure)


# -- site orchestration ---------------------------------------------------------------------


def capture_site(url: str, cfg: CaptureConfig, client: Optional[WebDriverClient] = None) -> CrawlRecord:
    notes: List[str] = []
    if cfg.respect_robots:
        verdict = check_robots(url, cfg.robots_fetcher, cfg.robots_agent)
        if verdict.note:
            notes.append(verdict.note)
        if not verdict.allowed:
            return CrawlRecord(url, url, False, robots_allowed=False, notes=(*notes, "robots.txt disallows this url"))
    client = client or WebDriverClient(cfg.webdriver_url)
    lex = Lexicons.shipped()

    def initial_extras(session: Session):
        return session.current_url()

    try:
        initial, page, final_url = capture_stage(Stage.INITIAL, url, (), cfg, client, after=initial_extras)
    except WebDriverError as exc:
        return CrawlRecord(url, url, False, notes=(*notes, f"load failed: {exc.error}: {exc.message[:200]}"))
    notes.extend(page.notes)
    extraction = extract_dialog(initial.forest(), initial.screenshot.viewport, cfg.selector_list, cfg.keyword_map)
    stages: Dict[Stage, StageCapture] = {Stage.INITIAL: initial}
    omitted: Dict[Stage, str] = {}
    language = None
    if extraction.active is not None and extraction.active.extracted_text.strip():
        language = detect_language(extraction.active.extracted_text).lang

    links = _policy_links(extraction, final_url or url, cfg.subpage_cap)
    subpages: Tuple[Subpage, ...] = ()
    if links:
        with BrowserRun(cfg, client) as session:
            subpages = fetch_subpages(session, links)

    opt_in: Optional[SearchResult] = None
    opt_out: Optional[SearchResult] = None
    if extraction.active is not None:
        graph = BrowserGraph(cfg, url, essential=lex.essential, client=client)
        opt_in = shortest_path(graph, "opt_in", cfg.max_click_depth)
        opt_out = shortest_path(graph, "opt_out", cfg.max_click_depth)
        if opt_in.path is not None:
            stages[Stage.OPT_IN] = capture_stage(Stage.OPT_IN, url, opt_in.path, cfg, client)[0]
        else:
            omitted[Stage.OPT_IN] = "no opt-in path within the click depth"
        if opt_out.path is not None:
            stages[Stage.OPT_OUT] = capture_stage(Stage.OPT_OUT, url, opt_out.path, cfg, client)[0]
        else:
            omitted[Stage.OPT_OUT] = "no opt-out path within the click depth"
        close = [c for c in extraction.active.clickables if c.category is Category.CLOSE_BUTTON and c.locator]
        if close:
            path = (Action(close[0].locator, close[0].label, Category.CLOSE_BUTTON.value),)
            stages[Stage.CLOSE] = capture_stage(Stage.CLOSE, url, path, cfg, client)[0]
        else:
            omitted[Stage.CLOSE] = "dialog has no close control"
    else:
        for s in (Stage.OPT_IN, Stage.OPT_OUT, Stage.CLOSE):
            omitted[s] = "no consent dialog"

    disclosure = disclosure_on_first_page(extraction, lex.withdrawal)
    consent_path = opt_in.path if opt_in is not None and opt_in.path is not None else ()
    try:
        revocation = discover_revocation(url, consent_path, disclosure, cfg, client)
    except WebDriverError as exc:
        notes.append(f"revocation discovery failed: {exc.error}")
        revocation = None

    return CrawlRecord(
        requested_url=url,
        final_url=final_url or url,
        load_ok=True,
        stages=stages,
        robots_allowed=True,
        detected_language=language,
        revocation=revocation,
        clicks_opt_in=len(opt_in.path) if opt_in is not None and opt_in.path is not None else None,
        clicks_opt_out=len(opt_out.path) if opt_out is not None and opt_out.path is not None else None,
        opt_out_reachable=None if opt_out is None else opt_out.found,
        omitted_stages=omitted,
        subpages=subpages,
        notes=tuple(notes),
    )


def capture_many(urls: Sequence[str], cfg: CaptureConfig, workers: int = 1) -> Iterator[Tuple[str, Optional[CrawlRecord], Optional[BaseException]]]:
    """Yields (url, record, error) in input order; one failing site does not stop the others."""

    def one(url: str):
        try:
            return url, capture_site(url, cfg), None
        except Exception as exc:  # noqa: BLE001 - reported per site
            log.exception("capture of %s failed", url)
            return url, None, exc

    if workers <= 1:
        for u in urls:
            yield one(u)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(one, urls)
