"""Shortest click-path search over consent UI states.

The search is written against a small graph protocol so it can run over a live
browser (each probe replays the path in a fresh context) or over a synthetic
graph in tests.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Hashable, List, Optional, Protocol, Sequence, Tuple

from ..clickables import Category, ClickableElement
from ..text import LexiconSet, phrase_pattern


@dataclass(frozen=True)
class Action:
    locator: str
    label: str
    category: str
    kind: str = "click"  # click | scroll | point
    point: Optional[Tuple[float, float]] = None
    toggle_on: Optional[bool] = None
    essential: bool = False


@dataclass(frozen=True)
class UIState:
    key: Hashable
    dialog_open: bool
    actions: Tuple[Action, ...] = ()

    @property
    def toggles(self) -> Tuple[Action, ...]:
        return tuple(a for a in self.actions if a.category == Category.PREFERENCE_SLIDER.value)


class InteractionGraph(Protocol):
    def initial(self) -> Optional[UIState]: ...

    def step(self, path: Sequence[Action]) -> Optional[UIState]:
        """Apply ``path`` from a fresh start and return the resulting state (None on failure)."""
        ...


Goal = Callable[[Sequence[Action], UIState, UIState], bool]


def state_key(text: str, toggles: Sequence[Tuple[str, Optional[bool]]]) -> Hashable:
    return (hashlib.sha1(text.encode("utf-8")).hexdigest(), tuple(toggles))


def is_essential(label: str, essential: Optional[LexiconSet]) -> bool:
    if essential is None:
        return False
    return any(phrase_pattern(p).search(label) for p in essential.phrases())


def actions_from_clickables(clickables: Sequence[ClickableElement], essential: Optional[LexiconSet] = None) -> Tuple[Action, ...]:
    out = []
    for c in clickables:
        if not c.locator:
            continue
        out.append(
            Action(
                locator=c.locator,
                label=c.label,
                category=c.category.value,
                toggle_on=c.default_on,
                essential=is_essential(c.label, essential),
            )
        )
    return tuple(out)


def opt_in_goal(path: Sequence[Action], before: UIState, after: UIState) -> bool:
    return path[-1].category == Category.OPT_IN.value and not after.dialog_open


def opt_out_goal(path: Sequence[Action], before: UIState, after: UIState) -> bool:
    if after.dialog_open:
        return False
    last = path[-1]
    if last.category == Category.OPT_OUT.value:
        return True
    # "save" with every non-essential purpose switched off also counts as refusing
    optional = [t for t in before.toggles if not t.essential]
    return last.category == Category.MORE_OPTIONS.value and bool(optional) and not any(t.toggle_on for t in optional)


def _candidates(state: UIState, goal_kind: str) -> List[Action]:
    if goal_kind == "opt_in":
        wanted = (Category.OPT_IN.value, Category.MORE_OPTIONS.value)
        return [a for a in state.actions if a.category in wanted]
    wanted = (Category.OPT_OUT.value, Category.MORE_OPTIONS.value)
    picks = [a for a in state.actions if a.category in wanted]
    # switching purposes off commutes, so only the first one still on is expanded
    on = [t for t in state.toggles if t.toggle_on and not t.essential]
    if on:
        picks.insert(0, on[0])
    return picks


@dataclass(frozen=True)
class SearchResult:
    path: Optional[Tuple[Action, ...]]
    probes: int
    exhausted: bool  # True when the whole reachable graph within depth was explored

    @property
    def found(self) -> bool:
        return self.path is not None


def shortest_path(graph: InteractionGraph, goal_kind: str, max_depth: int = 4) -> SearchResult:
    """Breadth-first search from the initial state; states are deduplicated by key."""
    if goal_kind not in ("opt_in", "opt_out"):
        raise ValueError(f"unknown goal {goal_kind!r}")
    goal: Goal = opt_in_goal if goal_kind == "opt_in" else opt_out_goal
    start = graph.initial()
    if start is None or not start.dialog_open:
        return SearchResult(None, 0, True)
    frontier: List[Tuple[Tuple[Action, ...], UIState]] = [((), start)]
    seen = {start.key}
    probes = 0
    for _depth in range(max_depth):
        nxt = []
        for path, state in frontier:
            for action in _candidates(state, goal_kind):
                trial = path + (action,)
                probes += 1
                after = graph.step(trial)
                if after is None:
                    continue
                if goal(trial, state, after):
                    return SearchResult(trial, probes, False)
                if not after.dialog_open or after.key in seen:
                    continue
                seen.add(after.key)
                nxt.append((trial, after))
        frontier = nxt
        if not frontier:
            return SearchResult(None, probes, True)
    return SearchResult(None, probes, False)
