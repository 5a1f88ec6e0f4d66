"""Capture data model shared by the harness and the detectors.

All types are frozen dataclasses. Snapshots serialize to a canonical JSON
document; screenshots are stored separately as PNG files addressed by the
SHA-256 of their raw raster.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

SCHEMA_VERSION = 1

RGB = Tuple[int, int, int]


class Stage(str, Enum):
    INITIAL = "initial"
    OPT_IN = "opt_in"
    OPT_OUT = "opt_out"
    CLOSE = "close"

    @property
    def order(self) -> int:
        # Initial precedes the three interaction stages, which are unordered among themselves.
        return 0 if self is Stage.INITIAL else 1


class SameSite(str, Enum):
    UNSET = "unset"
    LAX = "lax"
    STRICT = "strict"
    NONE = "none"


class Position(str, Enum):
    STATIC = "static"
    FIXED = "fixed"
    ABSOLUTE = "absolute"
    STICKY = "sticky"
    RELATIVE = "relative"


class RevocationSource(str, Enum):
    KEYWORD_XPATH = "keyword_xpath"
    CORNER_BADGE = "corner_badge"
    NOT_FOUND = "not_found"


class SnapshotParseError(ValueError):
    """Raised for malformed snapshot bytes. ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class SchemaVersionError(ValueError):
    pass


@dataclass(frozen=True)
class RenderBox:
    x: float
    y: float
    width: float
    height: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "width", "height"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def area(self) -> float:
        return max(self.width, 0.0) * max(self.height, 0.0)

    @property
    def right(self) -> float:
        return self.x + self.width

    @property
    def bottom(self) -> float:
        return self.y + self.height

    def intersects(self, other: "RenderBox") -> bool:
        return (
            self.x < other.right
            and other.x < self.right
            and self.y < other.bottom
            and other.y < self.bottom
        )

    def translated(self, dx: float, dy: float) -> "RenderBox":
        return RenderBox(self.x + dx, self.y + dy, self.width, self.height)


@dataclass(frozen=True)
class StyleSubset:
    z_index: Optional[int] = None
    position: Position = Position.STATIC
    display_none: bool = False
    visibility_hidden: bool = False
    background_rgb: Optional[RGB] = None
    color_rgb: Optional[RGB] = None

    @property
    def hidden(self) -> bool:
        return self.display_none or self.visibility_hidden


DEFAULT_STYLE = StyleSubset()


@dataclass(frozen=True)
class DomNode:
    tag: str
    attributes: Tuple[Tuple[str, str], ...] = ()
    text: str = ""
    children: Tuple["DomNode", ...] = ()
    style: StyleSubset = DEFAULT_STYLE
    box: Optional[RenderBox] = None
    frame_id: int = 0
    # XPath of the live element; lets the harness click what the detectors classified.
    locator: Optional[str] = None

    def attr(self, name: str, default: Optional[str] = None) -> Optional[str]:
        for key, value in self.attributes:
            if key == name:
                return value
        return default

    @property
    def attrs(self) -> Dict[str, str]:
        return dict(self.attributes)

    def iter(self) -> Iterator["DomNode"]:
        """Pre-order traversal, iterative to survive deep pages."""
        stack: List[DomNode] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def node(tag: str, *children: DomNode, text: str = "", attrs: Optional[Mapping[str, str]] = None,
         style: Optional[StyleSubset] = None, box: Optional[RenderBox] = None,
         frame_id: int = 0, locator: Optional[str] = None) -> DomNode:
    """Convenience constructor used by fixtures and tests."""
    return DomNode(
        tag=tag,
        attributes=tuple((attrs or {}).items()),
        text=text,
        children=tuple(children),
        style=style or DEFAULT_STYLE,
        box=box,
        frame_id=frame_id,
        locator=locator,
    )


@dataclass(frozen=True)
class Screenshot:
    width: int
    height: int
    pixels: bytes  # row-major RGB, 3 bytes per pixel

    @property
    def sha256(self) -> str:
        h = hashlib.sha256(f"{self.width}x{self.height}:".encode())
        h.update(self.pixels)
        return h.hexdigest()

    def array(self):
        import numpy as np

        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)

    @classmethod
    def from_array(cls, arr) -> "Screenshot":
        import numpy as np

        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        h, w = arr.shape[:2]
        return cls(width=int(w), height=int(h), pixels=arr.tobytes())

    @classmethod
    def solid(cls, width: int, height: int, rgb: RGB = (255, 255, 255)) -> "Screenshot":
        return cls(width, height, bytes(rgb) * (width * height))

    def to_png(self) -> bytes:
        from PIL import Image

        img = Image.frombytes("RGB", (self.width, self.height), self.pixels)
        buf = io.BytesIO()
        img.save(buf, format="PNG", optimize=False)
        return buf.getvalue()

    @classmethod
    def from_png(cls, data: bytes) -> "Screenshot":
        from PIL import Image

        img = Image.open(io.BytesIO(data)).convert("RGB")
        return cls(img.width, img.height, img.tobytes())

    @property
    def viewport(self) -> RenderBox:
        return RenderBox(0, 0, self.width, self.height)


class ScreenshotStore:
    """Content-addressed PNG store. With ``root=None`` it keeps rasters in memory."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else None
        self._mem: Dict[str, Screenshot] = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def put(self, shot: Screenshot) -> str:
        digest = shot.sha256
        if self.root is None:
            self._mem[digest] = shot
        else:
            path = self.root / f"{digest}.png"
            if not path.exists():
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(shot.to_png())
                tmp.replace(path)
        return digest

    def get(self, digest: str) -> Screenshot:
        if self.root is None:
            try:
                return self._mem[digest]
            except KeyError:
                raise KeyError(f"screenshot {digest} not in store") from None
        shot = Screenshot.from_png((self.root / f"{digest}.png").read_bytes())
        if shot.sha256 != digest:
            raise ValueError(f"screenshot {digest} is corrupt")
        return shot


@dataclass(frozen=True)
class CookieRecord:
    name: str
    value: str
    host: str
    path: str = "/"
    secure: bool = False
    http_only: bool = False
    same_site: SameSite = SameSite.UNSET
    expiry: Optional[int] = None
    observed_stage: Stage = Stage.INITIAL

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.name, self.host, self.path)


@dataclass(frozen=True)
class InteractionEvent:
    stage: Stage
    element_locator: str
    label: str
    ordinal: int
    # "click" or "scroll"; scrolls count as revocation entry steps only.
    kind: str = "click"
    category: Optional[str] = None


@dataclass(frozen=True)
class StageCapture:
    stage: Stage
    dom: DomNode
    screenshot: Screenshot
    cookies: Tuple[CookieRecord, ...] = ()
    captured_at: int = 0
    actions: Tuple[InteractionEvent, ...] = ()
    frames: Tuple[DomNode, ...] = ()

    def forest(self) -> List[DomNode]:
        return [self.dom, *self.frames]


@dataclass(frozen=True)
class RevocationInfo:
    found_via: RevocationSource
    entry_steps: Optional[int] = None
    completion_interactions: Optional[int] = None
    disclosure_on_first_page: bool = False


@dataclass(frozen=True)
class Subpage:
    url: str
    text: str
    ok: bool = True


@dataclass(frozen=True)
class CrawlRecord:
    requested_url: str
    final_url: str
    load_ok: bool
    stages: Mapping[Stage, StageCapture] = field(default_factory=dict)
    robots_allowed: bool = True
    detected_language: Optional[str] = None
    translation_applied: bool = False
    revocation: Optional[RevocationInfo] = None
    clicks_opt_in: Optional[int] = None
    clicks_opt_out: Optional[int] = None
    # False when the click-path search proved no opt-out state is reachable.
    opt_out_reachable: Optional[bool] = None
    omitted_stages: Mapping[Stage, str] = field(default_factory=dict)
    subpages: Tuple[Subpage, ...] = ()
    notes: Tuple[str, ...] = ()

    def stage(self, stage: Stage) -> Optional[StageCapture]:
        return self.stages.get(stage)

    @property
    def captured_at(self) -> int:
        initial = self.stages.get(Stage.INITIAL)
        return initial.captured_at if initial else 0


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def _check_rgb(value: Optional[RGB]) -> bool:
    return value is None or (len(value) == 3 and all(0 <= c <= 255 for c in value))


def _validate_dom(root: DomNode, where: str, out: List[Violation]) -> None:
    seen: set = set()
    stack = [(root, where)]
    while stack:
        n, path = stack.pop()
        if id(n) in seen:
            # frozen tuples cannot form cycles, but shared subtrees still signal a bad builder
            out.append(Violation(path, "node appears twice in tree"))
            continue
        seen.add(id(n))
        if n.frame_id < 0:
            out.append(Violation(path, "frame_id must be >= 0"))
        if n.box is not None and (n.box.width < 0 or n.box.height < 0):
            out.append(Violation(path, "box width/height must be >= 0"))
        if not (_check_rgb(n.style.background_rgb) and _check_rgb(n.style.color_rgb)):
            out.append(Violation(path, "style channel outside [0,255]"))
        for i, child in enumerate(n.children):
            stack.append((child, f"{path}/{child.tag}[{i}]"))


def validate_crawl_record(record: CrawlRecord) -> List[Violation]:
    out: List[Violation] = []
    if record.load_ok and Stage.INITIAL not in record.stages:
        out.append(Violation("stages", "load_ok requires an initial stage"))
    for name in ("clicks_opt_in", "clicks_opt_out"):
        value = getattr(record, name)
        if value is not None and value < 1:
            out.append(Violation(name, "must be >= 1 when present"))
    rev = record.revocation
    if rev is not None:
        if rev.found_via is RevocationSource.NOT_FOUND and (
            rev.entry_steps is not None or rev.completion_interactions is not None
        ):
            out.append(Violation("revocation", "not_found must not carry step counts"))
        for name in ("entry_steps", "completion_interactions"):
            value = getattr(rev, name)
            if value is not None and value < 0:
                out.append(Violation(f"revocation.{name}", "must be >= 0"))
    for stage, cap in record.stages.items():
        where = f"stages.{stage.value}"
        if cap.stage is not stage:
            out.append(Violation(where, "stage key does not match capture"))
        if cap.screenshot.width <= 0 or cap.screenshot.height <= 0:
            out.append(Violation(f"{where}.screenshot", "dimensions must be > 0"))
        elif len(cap.screenshot.pixels) != cap.screenshot.width * cap.screenshot.height * 3:
            out.append(Violation(f"{where}.screenshot", "pixel buffer size mismatch"))
        for i, c in enumerate(cap.cookies):
            cw = f"{where}.cookies[{i}]"
            if not c.name:
                out.append(Violation(cw, "name must be non-empty"))
            if not c.host:
                out.append(Violation(cw, "host must be non-empty"))
            elif c.host != c.host.lower():
                out.append(Violation(cw, "host must be lowercase"))
        last = 0
        for i, ev in enumerate(cap.actions):
            if ev.ordinal < 1 or ev.ordinal <= last:
                out.append(Violation(f"{where}.actions[{i}]", "ordinals must increase from 1"))
            last = ev.ordinal
        _validate_dom(cap.dom, f"{where}.dom", out)
        for i, frame in enumerate(cap.frames):
            _validate_dom(frame, f"{where}.frames[{i}]", out)
    return out


# -- serialization ------------------------------------------------------------


def _box_to_json(box: Optional[RenderBox]) -> Optional[List[float]]:
    return None if box is None else [box.x, box.y, box.width, box.height]


def _style_to_json(style: StyleSubset) -> Dict[str, Any]:
    return {
        "z_index": style.z_index,
        "position": style.position.value,
        "display_none": style.display_none,
        "visibility_hidden": style.visibility_hidden,
        "background_rgb": list(style.background_rgb) if style.background_rgb else None,
        "color_rgb": list(style.color_rgb) if style.color_rgb else None,
    }


def _dom_to_json(root: DomNode) -> Dict[str, Any]:
    def conv(n: DomNode) -> Dict[str, Any]:
        return {
            "tag": n.tag,
            "attributes": [[k, v] for k, v in n.attributes],
            "text": n.text,
            "style": _style_to_json(n.style),
            "box": _box_to_json(n.box),
            "frame_id": n.frame_id,
            "locator": n.locator,
            "children": [conv(c) for c in n.children],
        }

    return conv(root)


def cookie_to_json(c: CookieRecord) -> Dict[str, Any]:
    return {
        "name": c.name,
        "value": c.value,
        "host": c.host,
        "path": c.path,
        "secure": c.secure,
        "http_only": c.http_only,
        "same_site": c.same_site.value,
        "expiry": c.expiry,
    }


def record_to_json(record: CrawlRecord, store: Optional[ScreenshotStore] = None) -> Dict[str, Any]:
    stages: Dict[str, Any] = {}
    for stage in Stage:
        cap = record.stages.get(stage)
        if cap is None:
            continue
        digest = store.put(cap.screenshot) if store is not None else cap.screenshot.sha256
        stages[stage.value] = {
            "captured_at": cap.captured_at,
            "screenshot_sha256": digest,
            "screenshot_size": [cap.screenshot.width, cap.screenshot.height],
            "dom": _dom_to_json(cap.dom),
            "frames": [_dom_to_json(f) for f in cap.frames],
            "cookies": [cookie_to_json(c) for c in cap.cookies],
            "actions": [
                {
                    "element_locator": ev.element_locator,
                    "label": ev.label,
                    "ordinal": ev.ordinal,
                    "kind": ev.kind,
                    "category": ev.category,
                }
                for ev in cap.actions
            ],
        }
    rev = record.revocation
    return {
        "schema_version": SCHEMA_VERSION,
        "requested_url": record.requested_url,
        "final_url": record.final_url,
        "load_ok": record.load_ok,
        "robots_allowed": record.robots_allowed,
        "detected_language": record.detected_language,
        "translation_applied": record.translation_applied,
        "stages": stages,
        "revocation": None
        if rev is None
        else {
            "found_via": rev.found_via.value,
            "entry_steps": rev.entry_steps,
            "completion_interactions": rev.completion_interactions,
            "disclosure_on_first_page": rev.disclosure_on_first_page,
        },
        "clicks_opt_in": record.clicks_opt_in,
        "clicks_opt_out": record.clicks_opt_out,
        "opt_out_reachable": record.opt_out_reachable,
        "omitted_stages": {s.value: reason for s, reason in sorted(record.omitted_stages.items(), key=lambda kv: kv[0].value)},
        "subpages": [{"url": p.url, "text": p.text, "ok": p.ok} for p in record.subpages],
        "notes": list(record.notes),
    }


def dumps_canonical(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize_capture(record: CrawlRecord, store: Optional[ScreenshotStore] = None) -> bytes:
    """Canonical UTF-8 JSON. Screenshots go to ``store`` when one is given."""
    return dumps_canonical(record_to_json(record, store))


def _rgb(value: Any) -> Optional[RGB]:
    return None if value is None else (int(value[0]), int(value[1]), int(value[2]))


def _style_from_json(d: Mapping[str, Any]) -> StyleSubset:
    return StyleSubset(
        z_index=d.get("z_index"),
        position=Position(d.get("position", "static")),
        display_none=bool(d.get("display_none", False)),
        visibility_hidden=bool(d.get("visibility_hidden", False)),
        background_rgb=_rgb(d.get("background_rgb")),
        color_rgb=_rgb(d.get("color_rgb")),
    )


def _dom_from_json(d: Mapping[str, Any]) -> DomNode:
    box = d.get("box")
    return DomNode(
        tag=d["tag"],
        attributes=tuple((str(k), str(v)) for k, v in d.get("attributes", [])),
        text=d.get("text", ""),
        children=tuple(_dom_from_json(c) for c in d.get("children", [])),
        style=_style_from_json(d.get("style", {})),
        box=None if box is None else RenderBox(*box),
        frame_id=int(d.get("frame_id", 0)),
        locator=d.get("locator"),
    )


def cookie_from_json(d: Mapping[str, Any], stage: Stage) -> CookieRecord:
    expiry = d["expiry"]
    return CookieRecord(
        name=d["name"],
        value=d["value"],
        host=d["host"],
        path=d["path"],
        secure=bool(d["secure"]),
        http_only=bool(d["http_only"]),
        same_site=SameSite(d["same_site"]),
        expiry=None if expiry is None else int(expiry),
        observed_stage=stage,
    )


def record_from_json(doc: Mapping[str, Any], store: Optional[ScreenshotStore] = None) -> CrawlRecord:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    stages: Dict[Stage, StageCapture] = {}
    for key, sd in doc.get("stages", {}).items():
        stage = Stage(key)
        digest = sd["screenshot_sha256"]
        if store is None:
            raise ValueError("a screenshot store is required to load stage captures")
        stages[stage] = StageCapture(
            stage=stage,
            dom=_dom_from_json(sd["dom"]),
            screenshot=store.get(digest),
            cookies=tuple(cookie_from_json(c, stage) for c in sd.get("cookies", [])),
            captured_at=int(sd["captured_at"]),
            actions=tuple(
                InteractionEvent(
                    stage=stage,
                    element_locator=a["element_locator"],
                    label=a["label"],
                    ordinal=int(a["ordinal"]),
                    kind=a.get("kind", "click"),
                    category=a.get("category"),
                )
                for a in sd.get("actions", [])
            ),
            frames=tuple(_dom_from_json(f) for f in sd.get("frames", [])),
        )
    rev = doc.get("revocation")
    return CrawlRecord(
        requested_url=doc["requested_url"],
        final_url=doc["final_url"],
        load_ok=bool(doc["load_ok"]),
        stages=stages,
        robots_allowed=bool(doc.get("robots_allowed", True)),
        detected_language=doc.get("detected_language"),
        translation_applied=bool(doc.get("translation_applied", False)),
        revocation=None
        if rev is None
        else RevocationInfo(
            found_via=RevocationSource(rev["found_via"]),
            entry_steps=rev.get("entry_steps"),
            completion_interactions=rev.get("completion_interactions"),
            disclosure_on_first_page=bool(rev.get("disclosure_on_first_page", False)),
        ),
        clicks_opt_in=doc.get("clicks_opt_in"),
        clicks_opt_out=doc.get("clicks_opt_out"),
        opt_out_reachable=doc.get("opt_out_reachable"),
        omitted_stages={Stage(k): v for k, v in doc.get("omitted_stages", {}).items()},
        subpages=tuple(Subpage(p["url"], p["text"], bool(p.get("ok", True))) for p in doc.get("subpages", [])),
        notes=tuple(doc.get("notes", [])),
    )


def deserialize_capture(data: bytes, store: Optional[ScreenshotStore] = None) -> CrawlRecord:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SnapshotParseError("invalid UTF-8", exc.start) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise SnapshotParseError(exc.msg, offset) from None
    if not isinstance(doc, dict):
        raise SnapshotParseError("top-level value must be an object", 0)
    try:
        return record_from_json(doc, store)
    except SchemaVersionError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, KeyError) and "not in store" in str(exc):
            raise
        raise SnapshotParseError(f"schema error: {exc!r}", len(data)) from None


def save_snapshot(record: CrawlRecord, directory: Path, name: str) -> Path:
    """Write ``<name>.json`` plus screenshots under ``directory/screenshots``."""
    directory = Path(directory)
    store = ScreenshotStore(directory / "screenshots")
    path = directory / f"{name}.json"
    path.write_bytes(serialize_capture(record, store))
    return path


def load_snapshot(path: Path) -> CrawlRecord:
    path = Path(path)
    return deserialize_capture(path.read_bytes(), ScreenshotStore(path.parent / "screenshots"))
