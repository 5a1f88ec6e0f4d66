"""A small CSS selector matcher over DomNode trees.

Supports type, #id, .class and attribute selectors ([a], =, ~=, |=, ^=, $=, *=,
with an optional ``i`` flag), descendant and child combinators, and comma lists.
That covers the container selectors CMPs publish; pseudo-classes are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .model import DomNode


class SelectorError(ValueError):
    pass


@dataclass(frozen=True)
class AttrTest:
    name: str
    op: Optional[str]
    value: str
    ignore_case: bool

    def test(self, node: DomNode) -> bool:
        actual = node.attr(self.name)
        if actual is None:
            return False
        if self.op is None:
            return True
        want = self.value
        if self.ignore_case:
            actual, want = actual.lower(), want.lower()
        if self.op == "=":
            return actual == want
        if self.op == "~=":
            return want in actual.split()
        if self.op == "|=":
            return actual == want or actual.startswith(want + "-")
        if self.op == "^=":
            return bool(want) and actual.startswith(want)
        if self.op == "$=":
            return bool(want) and actual.endswith(want)
        if self.op == "*=":
            return bool(want) and want in actual
        raise SelectorError(f"unknown operator {self.op}")


@dataclass(frozen=True)
class Compound:
    tag: Optional[str]
    ids: Tuple[str, ...]
    classes: Tuple[str, ...]
    attrs: Tuple[AttrTest, ...]

    def test(self, node: DomNode) -> bool:
        if self.tag is not None and self.tag != "*" and node.tag.lower() != self.tag:
            return False
        if self.ids and node.attr("id") not in self.ids:
            return False
        if self.classes:
            have = set((node.attr("class") or "").split())
            if not all(c in have for c in self.classes):
                return False
        return all(a.test(node) for a in self.attrs)


# A complex selector is stored right-to-left: [(compound, combinator-to-left), ...]
Complex = Tuple[Tuple[Compound, Optional[str]], ...]

_IDENT = r"-?[_a-zA-Z\u00a0-\uffff][-_a-zA-Z0-9\u00a0-\uffff]*"
_TOKEN = re.compile(
    rf"""
    (?P<ws>\s*>\s*|\s+)
  | (?P<tag>{_IDENT}|\*)
  | \#(?P<id>-?[-_a-zA-Z0-9\u00a0-\uffff]+)
  | \.(?P<cls>{_IDENT})
  | \[\s*(?P<aname>[-_a-zA-Z0-9:]+)\s*
        (?:(?P<op>[~|^$*]?=)\s*
           (?:"(?P<dq>[^"]*)"|'(?P<sq>[^']*)'|(?P<bare>[-_a-zA-Z0-9]+))
           \s*(?P<flag>[iIsS])?\s*)?
    \]
    """,
    re.VERBOSE,
)


def _parse_complex(text: str) -> Complex:
    text = text.strip()
    if not text:
        raise SelectorError("empty selector")
    parts: List[Tuple[Compound, Optional[str]]] = []
    pos = 0
    tag, ids, classes, attrs = None, [], [], []
    pending: Optional[str] = None
    have_any = False

    def flush() -> None:
        nonlocal tag, ids, classes, attrs, have_any
        if not have_any:
            raise SelectorError(f"dangling combinator in {text!r}")
        parts.append((Compound(tag, tuple(ids), tuple(classes), tuple(attrs)), pending))
        tag, ids, classes, attrs, have_any = None, [], [], [], False

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SelectorError(f"unsupported syntax at {text[pos:]!r}")
        pos = m.end()
        if m.group("ws") is not None:
            flush()
            pending = ">" if ">" in m.group("ws") else " "
            continue
        if m.group("tag") is not None:
            if have_any:
                raise SelectorError(f"type selector must come first in {text!r}")
            tag = m.group("tag").lower()
        elif m.group("id") is not None:
            ids.append(m.group("id"))
        elif m.group("cls") is not None:
            classes.append(m.group("cls"))
        else:
            value = m.group("dq") if m.group("dq") is not None else m.group("sq") if m.group("sq") is not None else m.group("bare") or ""
            attrs.append(AttrTest(m.group("aname").lower(), m.group("op"), value, (m.group("flag") or "").lower() == "i"))
        have_any = True
    flush()
    # parts are left-to-right with the combinator that preceded each compound
    out = []
    for i in range(len(parts) - 1, -1, -1):
        comp = parts[i][0]
        comb = parts[i][1] if i > 0 else None
        out.append((comp, comb))
    return tuple(out)


def _split_commas(text: str) -> List[str]:
    out, depth, quote, cur = [], 0, None, []
    for ch in text:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        cur.append(ch)
    out.append("".join(cur))
    return out


@dataclass(frozen=True)
class Selector:
    source: str
    alternatives: Tuple[Complex, ...]

    def matches(self, node: DomNode, ancestors: Sequence[DomNode]) -> bool:
        """``ancestors`` runs from the root down to the node's parent."""
        return any(_match_complex(c, node, ancestors) for c in self.alternatives)


@lru_cache(maxsize=1024)
def compile_selector(text: str) -> Selector:
    return Selector(text, tuple(_parse_complex(p) for p in _split_commas(text)))


def _match_complex(sel: Complex, node: DomNode, ancestors: Sequence[DomNode]) -> bool:
    comp, comb = sel[0]
    if not comp.test(node):
        return False
    if len(sel) == 1:
        return True
    rest = sel[1:]
    if comb == ">":
        return bool(ancestors) and _match_complex(rest, ancestors[-1], ancestors[:-1])
    for i in range(len(ancestors) - 1, -1, -1):
        if _match_complex(rest, ancestors[i], ancestors[:i]):
            return True
    return False


def parse_selector_list(text: str) -> List[str]:
    """Newline-delimited selectors. A ``#`` followed by whitespace starts a comment,
    so id selectors like ``#banner`` are not mistaken for comments."""
    out = []
    for raw in text.splitlines():
        line = re.split(r"(?:^|\s)#\s", raw, maxsplit=1)[0].strip()
        if not line or line.startswith("# ") or line == "#":
            continue
        compile_selector(line)
        out.append(line)
    return out


def select(root: DomNode, selector: str) -> List[DomNode]:
    sel = compile_selector(selector)
    out: List[DomNode] = []
    stack: List[Tuple[DomNode, Tuple[DomNode, ...]]] = [(root, ())]
    while stack:
        n, anc = stack.pop()
        if sel.matches(n, anc):
            out.append(n)
        child_anc = anc + (n,)
        stack.extend((c, child_anc) for c in reversed(n.children))
    return out
