"""Traversal helpers over DomNode forests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .model import DomNode, RenderBox

# Path of a node inside a forest: (frame index, child indices from the frame root).
NodePath = Tuple[int, Tuple[int, ...]]

SKIP_TEXT_TAGS = frozenset({"script", "style", "noscript", "template", "head", "meta", "link", "title"})


@dataclass(frozen=True)
class NodeRef:
    node: DomNode
    path: NodePath
    ancestors: Tuple[DomNode, ...]
    hidden: bool  # true when the node or an ancestor is display:none / visibility:hidden
    order: int  # document order across the forest

    @property
    def parent(self) -> Optional[DomNode]:
        return self.ancestors[-1] if self.ancestors else None


def walk(forest: Sequence[DomNode]) -> Iterator[NodeRef]:
    order = 0
    for fi, root in enumerate(forest):
        stack: List[Tuple[DomNode, Tuple[int, ...], Tuple[DomNode, ...], bool]] = [(root, (), (), False)]
        while stack:
            n, idx, anc, hidden = stack.pop()
            hidden = hidden or n.style.hidden
            yield NodeRef(n, (fi, idx), anc, hidden, order)
            order += 1
            child_anc = anc + (n,)
            for i in range(len(n.children) - 1, -1, -1):
                stack.append((n.children[i], idx + (i,), child_anc, hidden))


def is_ancestor_path(a: NodePath, b: NodePath) -> bool:
    """True when ``a`` is a strict ancestor of ``b``."""
    return a[0] == b[0] and len(a[1]) < len(b[1]) and b[1][: len(a[1])] == a[1]


def visible_text(root: DomNode, cap: Optional[int] = None) -> str:
    """Whitespace-normalized text of the visible part of a subtree, in document order."""
    parts: List[str] = []
    size = 0
    stack = [root]
    while stack:
        n = stack.pop()
        if n.style.hidden or n.tag.lower() in SKIP_TEXT_TAGS:
            continue
        if n.text.strip():
            t = " ".join(n.text.split())
            parts.append(t)
            size += len(t) + 1
            if cap is not None and size >= cap:
                break
        stack.extend(reversed(n.children))
    text = " ".join(parts)
    return text[:cap] if cap is not None else text


def subtree(root: DomNode) -> Iterator[Tuple[DomNode, Tuple[DomNode, ...], bool]]:
    """Pre-order (node, ancestors-within-subtree, hidden) triples."""
    stack: List[Tuple[DomNode, Tuple[DomNode, ...], bool]] = [(root, (), False)]
    while stack:
        n, anc, hidden = stack.pop()
        hidden = hidden or n.style.hidden
        yield n, anc, hidden
        child_anc = anc + (n,)
        stack.extend((c, child_anc, hidden) for c in reversed(n.children))


def box_visible(box: Optional[RenderBox], viewport: RenderBox) -> bool:
    return box is not None and box.width > 0 and box.height > 0 and box.intersects(viewport)


@lru_cache(maxsize=1)
def keywords() -> Dict:
    return json.loads(resources.files("consentlens.data").joinpath("keywords.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_selectors() -> Tuple[str, ...]:
    from .selectors import parse_selector_list

    text = resources.files("consentlens.data").joinpath("selectors.txt").read_text(encoding="utf-8")
    return tuple(parse_selector_list(text))
