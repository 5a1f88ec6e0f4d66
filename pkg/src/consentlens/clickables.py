"""Classification of interactive elements inside a consent dialog."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .dom import keywords, subtree, visible_text
from .model import DomNode, RenderBox, StyleSubset
from .text import LexiconSet, normalize, phrase_pattern


class Category(str, Enum):
    OPT_IN = "OptIn"
    OPT_OUT = "OptOut"
    MORE_OPTIONS = "MoreOptions"
    PREFERENCE_SLIDER = "PreferenceSlider"
    CLOSE_BUTTON = "CloseButton"
    POLICY_LINK = "PolicyLink"
    UNKNOWN = "Unknown"


# Keyword rules are tried in this order; the first category with a hit wins.
KEYWORD_PRECEDENCE = (
    Category.OPT_OUT,
    Category.OPT_IN,
    Category.MORE_OPTIONS,
    Category.CLOSE_BUTTON,
    Category.POLICY_LINK,
)

CLICKABLE_TAGS = frozenset({"a", "button"})
CLICKABLE_INPUTS = frozenset({"button", "submit", "reset", "image", "checkbox"})
CLICK_ROLES = frozenset({"button", "link", "menuitem", "tab", "checkbox", "switch", "menuitemcheckbox"})
TOGGLE_ROLES = frozenset({"checkbox", "switch", "menuitemcheckbox"})

OVERFLOW_SLACK_PX = 8.0


@dataclass(frozen=True)
class NodeShape:
    kind: str  # tag name, lowercase
    role: Optional[str] = None
    has_href: bool = False
    input_type: Optional[str] = None

    @property
    def is_toggle(self) -> bool:
        return (self.kind == "input" and self.input_type == "checkbox") or (self.role in TOGGLE_ROLES)

    @classmethod
    def of(cls, node: DomNode) -> "NodeShape":
        kind = node.tag.lower()
        input_type = None
        if kind == "input":
            input_type = (node.attr("type") or "text").lower()
        return cls(
            kind=kind,
            role=(node.attr("role") or "").lower() or None,
            has_href=node.attr("href") is not None,
            input_type=input_type,
        )


@lru_cache(maxsize=1)
def default_keyword_map() -> LexiconSet:
    return LexiconSet.from_mapping("clickables", keywords()["clickables"])


def load_keyword_map(doc: Dict[str, Iterable[str]], base: Optional[LexiconSet] = None) -> LexiconSet:
    """Merge a {category: [phrases]} document over the built-in map."""
    valid = {c.value for c in KEYWORD_PRECEDENCE}
    unknown = set(doc) - valid
    if unknown:
        raise ValueError(f"unknown clickable categories: {sorted(unknown)}")
    extra = LexiconSet.from_mapping("clickables", doc)
    return (base or default_keyword_map()).merged(extra)


def classify_with_phrase(label: str, shape: NodeShape, keyword_map: Optional[LexiconSet] = None) -> Tuple[Category, Optional[str]]:
    kmap = keyword_map or default_keyword_map()
    label = normalize(label)
    if label:
        for cat in KEYWORD_PRECEDENCE:
            # prefer the longest phrase so evidence names the most specific hit
            for phrase in sorted(kmap.phrases(cat.value), key=len, reverse=True):
                if phrase_pattern(phrase).search(label):
                    return cat, phrase
    if shape.is_toggle:
        return Category.PREFERENCE_SLIDER, None
    return Category.UNKNOWN, None


def classify_clickable(label: str, shape: NodeShape, keyword_map: Optional[LexiconSet] = None) -> Category:
    return classify_with_phrase(label, shape, keyword_map)[0]


@dataclass(frozen=True)
class ClickableElement:
    node: DomNode
    category: Category
    label: str
    box: Optional[RenderBox]
    style: StyleSubset
    matched_phrase: Optional[str] = None
    default_on: Optional[bool] = None  # toggles only

    @property
    def locator(self) -> Optional[str]:
        return self.node.locator


def is_clickable(n: DomNode) -> bool:
    tag = n.tag.lower()
    if tag in CLICKABLE_TAGS:
        return True
    if tag == "input" and (n.attr("type") or "text").lower() in CLICKABLE_INPUTS:
        return True
    if (n.attr("role") or "").lower() in CLICK_ROLES:
        return True
    return n.attr("onclick") is not None


def toggle_state(n: DomNode) -> bool:
    if n.attr("checked") is not None and n.attr("checked") != "false":
        return True
    return (n.attr("aria-checked") or "").lower() == "true" or (n.attr("aria-pressed") or "").lower() == "true"


def _label_for(n: DomNode, ancestors: Sequence[DomNode], labels_by_id: Dict[str, str]) -> str:
    for attr in ("aria-label", "title"):
        value = n.attr(attr)
        if value and value.strip():
            return normalize(value)
    text = visible_text(n)
    if text:
        return normalize(text)
    if n.tag.lower() == "input":
        if (n.attr("type") or "").lower() == "checkbox":
            nid = n.attr("id")
            if nid and nid in labels_by_id:
                return labels_by_id[nid]
            for anc in reversed(ancestors):
                if anc.tag.lower() == "label":
                    return normalize(visible_text(anc))
            if ancestors:
                return normalize(visible_text(ancestors[-1]))
        value = n.attr("value")
        if value:
            return normalize(value)
    for child, _, _ in subtree(n):
        alt = child.attr("alt")
        if alt:
            return normalize(alt)
    return ""


def _within(box: Optional[RenderBox], bounds: Sequence[RenderBox]) -> bool:
    if box is None or not bounds:
        return True
    s = OVERFLOW_SLACK_PX
    return any(
        box.x >= b.x - s and box.y >= b.y - s and box.right <= b.right + s and box.bottom <= b.bottom + s
        for b in bounds
    )


def extract_clickables(root: DomNode, keyword_map: Optional[LexiconSet] = None, bounds: Sequence[RenderBox] = ()) -> List[ClickableElement]:
    """Interactive elements of a dialog subtree in document order.

    ``bounds`` is the dialog's box union; elements outside it (plus slack) are dropped.
    """
    labels_by_id: Dict[str, str] = {}
    for n, _, hidden in subtree(root):
        if n.tag.lower() == "label" and n.attr("for") and not hidden:
            labels_by_id[n.attr("for")] = normalize(visible_text(n))
    out: List[ClickableElement] = []
    stack: List[Tuple[DomNode, Tuple[DomNode, ...]]] = [(root, ())]
    while stack:
        n, anc = stack.pop()
        if n.style.hidden:
            continue
        if is_clickable(n) and (n is not root or not n.children):
            if _within(n.box, bounds):
                label = _label_for(n, anc, labels_by_id)
                shape = NodeShape.of(n)
                cat, phrase = classify_with_phrase(label, shape, keyword_map)
                default_on = toggle_state(n) if shape.is_toggle else None
                out.append(ClickableElement(n, cat, label, n.box, n.style, phrase, default_on))
            continue
        child_anc = anc + (n,)
        stack.extend((c, child_anc) for c in reversed(n.children))
    return out


def detect_preference_sliders(clickables: Sequence[ClickableElement]) -> List[Tuple[ClickableElement, bool]]:
    return [(c, bool(c.default_on)) for c in clickables if c.category is Category.PREFERENCE_SLIDER]


def categories(clickables: Sequence[ClickableElement]) -> Dict[Category, List[ClickableElement]]:
    out: Dict[Category, List[ClickableElement]] = {c: [] for c in Category}
    for el in clickables:
        out[el.category].append(el)
    return out
