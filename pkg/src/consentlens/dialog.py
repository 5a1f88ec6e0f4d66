"""Consent-dialog candidate extraction, scoring and selection."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .clickables import Category, ClickableElement, extract_clickables
from .dom import NodePath, NodeRef, box_visible, default_selectors, is_ancestor_path, keywords, visible_text, walk
from .model import DomNode, Position, RenderBox
from .selectors import compile_selector
from .text import LexiconSet, normalize, split_words
from .visual import viewport_coverage

TEXT_CAP = 5_000
KEYWORD_MAX_WORDS = 400
KEYWORD_MIN_HITS = 2
DOMINANCE_MIN_COVERAGE = 0.25
Z_TOP_THRESHOLD = 1000
DENSITY_CLAMP = 10.0
NEVER_ROOTS = frozenset({"html", "body", "head"})
DIALOG_ROLES = frozenset({"dialog", "alertdialog"})
CONSENT_ACTIONS = frozenset({Category.OPT_IN, Category.OPT_OUT, Category.MORE_OPTIONS})


class MatchedBy(str, Enum):
    SELECTOR = "SelectorList"
    KEYWORD = "KeywordHeuristic"
    VISUAL = "VisualDominance"


@dataclass(frozen=True)
class ScoreWeights:
    text_density: float = 0.5
    z_visibility: float = 0.3
    structural_uniqueness: float = 0.2


@dataclass(frozen=True)
class ScoreComponents:
    text_density: float
    z_visibility: float
    structural_uniqueness: float


@dataclass(frozen=True)
class DialogCandidate:
    root: DomNode
    path: NodePath
    matched_by: FrozenSet[MatchedBy]
    extracted_text: str
    order: int
    sibling_count: int = 1
    score: float = 0.0
    score_components: Optional[ScoreComponents] = None
    clickables: Tuple[ClickableElement, ...] = ()
    boxes: Tuple[RenderBox, ...] = ()
    area_fraction: float = 0.0

    @property
    def label(self) -> str:
        ident = self.root.attr("id")
        return f"{self.root.tag}#{ident}" if ident else f"{self.root.tag}@{self.path}"


class ScoringError(ValueError):
    pass


@lru_cache(maxsize=8)
def _keyword_regex(words: Tuple[str, ...]) -> "re.Pattern[str]":
    # prefix match so "cookie" also counts "cookies"
    alts = "|".join(re.escape(w) for w in sorted(words, key=len, reverse=True))
    return re.compile(rf"(?<!\w)(?:{alts})")


def default_consent_keywords() -> LexiconSet:
    return LexiconSet.from_mapping("consent_keywords", {"consent": keywords()["consent_keywords"]})


def keyword_hits(text: str, lexicon: Optional[LexiconSet] = None) -> int:
    lex = lexicon or default_consent_keywords()
    return len(_keyword_regex(tuple(lex.phrases())).findall(normalize(text)))


def dialog_boxes(root: DomNode, viewport: RenderBox) -> List[RenderBox]:
    """Root box plus boxes of positioned, visible descendants (backdrops, floating layers)."""
    boxes: List[RenderBox] = []
    if box_visible(root.box, viewport):
        boxes.append(root.box)
    stack = list(root.children)
    while stack:
        n = stack.pop()
        if n.style.hidden:
            continue
        if n.style.position in (Position.FIXED, Position.ABSOLUTE) and box_visible(n.box, viewport):
            boxes.append(n.box)
        stack.extend(n.children)
    return boxes


def _signature(n: DomNode) -> Tuple[str, str]:
    return (n.tag.lower(), " ".join(sorted((n.attr("class") or "").split())))


def _dialog_like(n: DomNode) -> bool:
    return (
        n.style.position in (Position.FIXED, Position.ABSOLUTE, Position.STICKY)
        or n.style.z_index is not None
        or (n.attr("role") or "").lower() in DIALOG_ROLES
        or (n.attr("aria-modal") or "").lower() == "true"
        or n.tag.lower() == "dialog"
    )


def find_candidates(
    forest: Sequence[DomNode],
    viewport: RenderBox,
    selector_list: Optional[Sequence[str]] = None,
    keyword_lexicon: Optional[LexiconSet] = None,
    keyword_map: Optional[LexiconSet] = None,
) -> List[DialogCandidate]:
    """Visible subtree roots matched by selector, keyword heuristic or visual dominance,
    collapsed to the outermost matching root."""
    selectors = [compile_selector(s) for s in (selector_list if selector_list is not None else default_selectors())]
    if not selectors:
        raise ValueError("selector list must not be empty")
    lex = keyword_lexicon or default_consent_keywords()
    matches: Dict[NodePath, Tuple[NodeRef, set]] = {}
    for ref in walk(forest):
        n = ref.node
        if ref.hidden or n.tag.lower() in NEVER_ROOTS or not box_visible(n.box, viewport):
            continue
        how = set()
        if any(s.matches(n, ref.ancestors) for s in selectors):
            how.add(MatchedBy.SELECTOR)
        positioned = n.style.position in (Position.FIXED, Position.ABSOLUTE)
        if positioned or _dialog_like(n):
            text = visible_text(n, TEXT_CAP)
            hits = keyword_hits(text, lex)
            if positioned and hits >= 1 and n.box.area >= DOMINANCE_MIN_COVERAGE * viewport.area:
                how.add(MatchedBy.VISUAL)
            if hits >= KEYWORD_MIN_HITS and len(split_words(text)) <= KEYWORD_MAX_WORDS:
                actions = extract_clickables(n, keyword_map)
                if any(c.category in CONSENT_ACTIONS for c in actions):
                    how.add(MatchedBy.KEYWORD)
        if how:
            matches[ref.path] = (ref, how)

    out: List[DialogCandidate] = []
    paths = sorted(matches)
    for path in paths:
        ref, how = matches[path]
        outer = [p for p in paths if is_ancestor_path(p, path)]
        if outer:
            continue
        # fold the matched_by tags of nested matches into the outer root
        merged = set(how)
        for other in paths:
            if is_ancestor_path(path, other):
                merged |= matches[other][1]
        parent = ref.parent
        siblings = 1
        if parent is not None:
            sig = _signature(ref.node)
            siblings = sum(1 for c in parent.children if _signature(c) == sig and not c.style.hidden)
        boxes = tuple(dialog_boxes(ref.node, viewport))
        out.append(
            DialogCandidate(
                root=ref.node,
                path=path,
                matched_by=frozenset(merged),
                extracted_text=visible_text(ref.node, TEXT_CAP),
                order=ref.order,
                sibling_count=max(siblings, 1),
                boxes=boxes,
            )
        )
    out.sort(key=lambda c: c.order)
    return out


def _max_z(root: DomNode) -> Optional[int]:
    best = None
    stack = [root]
    while stack:
        n = stack.pop()
        if n.style.z_index is not None:
            best = n.style.z_index if best is None else max(best, n.style.z_index)
        stack.extend(n.children)
    return best


def score_components(candidate: DialogCandidate, viewport: RenderBox, keyword_lexicon: Optional[LexiconSet] = None) -> ScoreComponents:
    if candidate.root.box is None:
        raise ScoringError(f"candidate {candidate.label} has no render box")
    words = len(split_words(candidate.extracted_text))
    hits = keyword_hits(candidate.extracted_text, keyword_lexicon)
    density = 0.0 if words == 0 else min(DENSITY_CLAMP, max(0.0, 100.0 * hits / words))
    z = _max_z(candidate.root)
    if z is None:
        z_vis = 0.0
    elif z >= Z_TOP_THRESHOLD:
        z_vis = 1.0
    else:
        z_vis = max(0, z) / Z_TOP_THRESHOLD
    return ScoreComponents(density, z_vis, 1.0 / candidate.sibling_count)


def score_candidate(
    candidate: DialogCandidate,
    viewport: RenderBox,
    weights: ScoreWeights = ScoreWeights(),
    keyword_lexicon: Optional[LexiconSet] = None,
) -> DialogCandidate:
    comp = score_components(candidate, viewport, keyword_lexicon)
    score = (
        weights.text_density * comp.text_density / DENSITY_CLAMP
        + weights.z_visibility * comp.z_visibility
        + weights.structural_uniqueness * comp.structural_uniqueness
    )
    area = viewport_coverage([candidate.root.box], viewport) if viewport.area > 0 else 0.0
    return replace(candidate, score=max(0.0, score), score_components=comp, area_fraction=area)


def rank_and_select(candidates: Sequence[DialogCandidate]) -> Tuple[Optional[DialogCandidate], List[DialogCandidate]]:
    if not candidates:
        return None, []
    ranked = sorted(candidates, key=lambda c: (-c.score, -c.area_fraction, c.order))
    return ranked[0], list(candidates)


def attach_clickables(candidate: DialogCandidate, keyword_map: Optional[LexiconSet] = None) -> DialogCandidate:
    return replace(candidate, clickables=tuple(extract_clickables(candidate.root, keyword_map, candidate.boxes)))


@dataclass
class Extraction:
    active: Optional[DialogCandidate]
    all_visible: List[DialogCandidate] = field(default_factory=list)


def extract_dialog(
    forest: Sequence[DomNode],
    viewport: RenderBox,
    selector_list: Optional[Sequence[str]] = None,
    keyword_map: Optional[LexiconSet] = None,
    weights: ScoreWeights = ScoreWeights(),
) -> Extraction:
    """find, score, rank, then classify the active dialog's clickables."""
    found = find_candidates(forest, viewport, selector_list, keyword_map=keyword_map)
    scored = [score_candidate(c, viewport, weights) for c in found if c.root.box is not None]
    active, all_visible = rank_and_select(scored)
    if active is not None:
        active = attach_clickables(active, keyword_map)
        all_visible = [active if c.path == active.path else c for c in all_visible]
    return Extraction(active, all_visible)
