"""Dark-pattern rules DP1-DP19 over a captured site.

Every rule returns a verdict with a tri-state outcome: triggered, clean, or not
applicable (required inputs missing). Evidence is plain JSON data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .clickables import Category, ClickableElement, categories, detect_preference_sliders
from .cookies import (
    TrackerList,
    default_trackers,
    is_id_like,
    match_trackers,
    partition_party,
    stage_diff,
)
from .dialog import DialogCandidate
from .dom import is_ancestor_path, keywords
from .model import CrawlRecord, RevocationSource, Screenshot, Stage
from .psl import SuffixRules
from .text import LexiconSet, match_lexicon, normalize, phrase_pattern, readability, shipped_lexicon
from .visual import grayscale, region_mean_gray, viewport_coverage

PATTERNS = tuple(f"DP{i}" for i in range(1, 20))

# Rules whose prevalence denominator is the set of sites with a dialog.
DIALOG_RULES = frozenset({"DP1", "DP2", "DP3", "DP4", "DP5", "DP6", "DP7", "DP8", "DP11", "DP12", "DP13", "DP17", "DP19"})


class Dp16Mode(str, Enum):
    STANDARD = "standard"
    STRICT = "strict"


@dataclass(frozen=True)
class RuleConfig:
    flesch_max: float = 50.0
    contrast_threshold: float = 170.0
    coverage_threshold: float = 0.60
    dp16_mode: Dp16Mode = Dp16Mode.STANDARD
    fuzzy_threshold: float = 0.85
    max_entry_steps: int = 2
    max_completion_interactions: int = 2
    settle_seconds: int = 30
    dp13_window: int = 200

    def __post_init__(self) -> None:
        object.__setattr__(self, "dp16_mode", Dp16Mode(self.dp16_mode))
        for name in ("flesch_max", "contrast_threshold", "coverage_threshold", "fuzzy_threshold", "dp13_window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.coverage_threshold < 1):
            raise ValueError("coverage_threshold must be in (0, 1)")
        if not (0 < self.fuzzy_threshold <= 1):
            raise ValueError("fuzzy_threshold must be in (0, 1]")
        for name in ("max_entry_steps", "max_completion_interactions", "settle_seconds"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RuleConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(data))

    @classmethod
    def load(cls, path: Path) -> "RuleConfig":
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
            data = data.get("rules", data)
        else:
            data = json.loads(raw)
        return cls.from_mapping(data)


@dataclass(frozen=True)
class DPVerdict:
    pattern: str
    triggered: bool
    applicable: bool = True
    evidence: Mapping[str, Any] = field(default_factory=dict)
    reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.triggered and not self.applicable:
            raise ValueError(f"{self.pattern}: triggered verdict must be applicable")
        # canonical JSON form keeps store round-trips exact
        object.__setattr__(self, "evidence", json.loads(json.dumps(self.evidence, sort_keys=True)))

    @property
    def outcome(self) -> Optional[bool]:
        return self.triggered if self.applicable else None

    def to_json(self) -> Dict[str, Any]:
        return {
            "pattern": self.pattern,
            "triggered": self.triggered,
            "applicable": self.applicable,
            "evidence": self.evidence,
            "reason": self.reason,
        }

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> "DPVerdict":
        return cls(d["pattern"], bool(d["triggered"]), bool(d["applicable"]), d.get("evidence", {}), d.get("reason"))


def na(pattern: str, reason: str, **evidence: Any) -> DPVerdict:
    return DPVerdict(pattern, False, False, evidence, reason)


@dataclass(frozen=True)
class DetectionReport:
    site_url: str
    final_url: str
    load_ok: bool
    dialog_found: bool
    verdicts: Tuple[DPVerdict, ...]
    captured_at: int = 0
    warnings: Tuple[str, ...] = ()

    def verdict(self, pattern: str) -> DPVerdict:
        for v in self.verdicts:
            if v.pattern == pattern:
                return v
        raise KeyError(pattern)

    def outcomes(self) -> Dict[str, Optional[bool]]:
        return {v.pattern: v.outcome for v in self.verdicts}

    def triggered(self) -> List[str]:
        return [v.pattern for v in self.verdicts if v.triggered]

    def to_json(self) -> Dict[str, Any]:
        return {
            "site_url": self.site_url,
            "final_url": self.final_url,
            "load_ok": self.load_ok,
            "dialog_found": self.dialog_found,
            "captured_at": self.captured_at,
            "warnings": list(self.warnings),
            "verdicts": [v.to_json() for v in self.verdicts],
        }

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> "DetectionReport":
        return cls(
            site_url=d["site_url"],
            final_url=d["final_url"],
            load_ok=bool(d["load_ok"]),
            dialog_found=bool(d["dialog_found"]),
            verdicts=tuple(DPVerdict.from_json(v) for v in d["verdicts"]),
            captured_at=int(d.get("captured_at", 0)),
            warnings=tuple(d.get("warnings", [])),
        )


@dataclass(frozen=True)
class Lexicons:
    dp11: LexiconSet
    dp12: LexiconSet
    dp13: LexiconSet
    dp17: LexiconSet
    withdrawal: LexiconSet
    essential: LexiconSet

    @classmethod
    @lru_cache(maxsize=1)
    def shipped(cls) -> "Lexicons":
        kw = keywords()
        return cls(
            dp11=shipped_lexicon("dp11_definitions"),
            dp12=shipped_lexicon("dp12_purposes"),
            dp13=shipped_lexicon("dp13_pricing"),
            dp17=shipped_lexicon("dp17_legal"),
            withdrawal=LexiconSet.from_mapping("withdrawal", {"Withdrawal": kw["withdrawal_disclosure"]}),
            essential=LexiconSet.from_mapping("essential", {"Essential": kw["essential_labels"]}),
        )


def _click_summary(items: Sequence[ClickableElement]) -> List[Dict[str, Any]]:
    return [{"label": c.label, "category": c.category.value} for c in items]


# -- baseline rules ------------------------------------------------------------------


def dp1_only_opt_in(clickables: Sequence[ClickableElement]) -> DPVerdict:
    cats = categories(clickables)
    hit = bool(cats[Category.OPT_IN]) and not cats[Category.OPT_OUT] and not cats[Category.MORE_OPTIONS]
    return DPVerdict("DP1", hit, True, {"clickables": _click_summary(clickables)})


def _background_gray(dialog: DialogCandidate, shot: Screenshot) -> float:
    bg = dialog.root.style.background_rgb
    if bg is not None:
        return grayscale(*bg)
    return region_mean_gray(shot, dialog.root.box).mean


def dp2_highlighted_opt_in(dialog: DialogCandidate, shot: Optional[Screenshot], config: RuleConfig) -> DPVerdict:
    cats = categories(dialog.clickables)
    opt_in = [c for c in cats[Category.OPT_IN] if c.box is not None]
    opt_out = [c for c in cats[Category.OPT_OUT] if c.box is not None]
    if not opt_in:
        return na("DP2", "no opt-in control with a box")
    if not cats[Category.OPT_OUT]:
        return DPVerdict("DP2", True, True, {"branch": "no_opt_out", "opt_in": opt_in[0].label})
    if shot is None:
        return na("DP2", "no screenshot")
    if not opt_out:
        return na("DP2", "opt-out control has no box")
    a, b = opt_in[0], opt_out[0]
    try:
        mean_in = region_mean_gray(shot, a.box).mean
        mean_out = region_mean_gray(shot, b.box).mean
        background = _background_gray(dialog, shot)
    except ValueError as exc:
        return na("DP2", f"raster sampling failed: {exc}")
    delta = abs(mean_in - mean_out)
    sal_in, sal_out = abs(mean_in - background), abs(mean_out - background)
    hit = delta >= config.contrast_threshold and sal_in > sal_out
    return DPVerdict(
        "DP2",
        hit,
        True,
        {
            "branch": "contrast",
            "opt_in": a.label,
            "opt_out": b.label,
            "opt_in_gray": mean_in,
            "opt_out_gray": mean_out,
            "background_gray": background,
            "button_delta": delta,
            "opt_in_background_delta": sal_in,
            "opt_out_background_delta": sal_out,
            "threshold": config.contrast_threshold,
        },
    )


def dp3_obstruct_window(dialog: DialogCandidate, shot: Optional[Screenshot], config: RuleConfig) -> DPVerdict:
    if shot is None:
        return na("DP3", "no viewport size")
    boxes = list(dialog.boxes) or ([dialog.root.box] if dialog.root.box else [])
    if not boxes:
        return na("DP3", "dialog has no box")
    coverage = viewport_coverage(boxes, shot.viewport)
    return DPVerdict("DP3", coverage > config.coverage_threshold, True, {"coverage": coverage, "threshold": config.coverage_threshold})


def flesch_verdict(score: Fraction, config: RuleConfig) -> bool:
    return score <= Fraction(str(config.flesch_max))


def dp4_complex_text(text: str, config: RuleConfig) -> DPVerdict:
    try:
        r = readability(text)
    except ValueError:
        return na("DP4", "dialog has no words")
    return DPVerdict(
        "DP4",
        flesch_verdict(r.exact, config),
        True,
        {"score": r.score, "words": r.words, "sentences": r.sentences, "syllables": r.syllables, "max": config.flesch_max},
    )


def dp5_more_options(clickables: Sequence[ClickableElement], record: CrawlRecord) -> DPVerdict:
    cats = categories(clickables)
    if cats[Category.OPT_OUT]:
        return DPVerdict("DP5", False, True, {"first_layer_opt_out": cats[Category.OPT_OUT][0].label})
    if not cats[Category.MORE_OPTIONS]:
        return DPVerdict("DP5", False, True, {"first_layer_more_options": False})
    opt_out = record.stage(Stage.OPT_OUT)
    if opt_out is not None and opt_out.actions:
        path = [a.category for a in opt_out.actions if a.kind == "click"]
        layered = (
            len(path) >= 2
            and path[0] == Category.MORE_OPTIONS.value
            and any(c in (Category.OPT_OUT.value, Category.MORE_OPTIONS.value) for c in path[1:])
        )
        return DPVerdict("DP5", layered, True, {"opt_out_path": path, "actions": [a.label for a in opt_out.actions]})
    if record.opt_out_reachable is False:
        return DPVerdict("DP5", False, True, {"note": "no reject control reachable in any layer"})
    return na("DP5", "secondary-layer capture absent")


def dp6_ambiguous_close(clickables: Sequence[ClickableElement]) -> DPVerdict:
    cats = categories(clickables)
    hit = bool(cats[Category.CLOSE_BUTTON]) and bool(cats[Category.OPT_IN])
    return DPVerdict("DP6", hit, True, {"close": _click_summary(cats[Category.CLOSE_BUTTON])})


def dp7_multiple_dialogs(all_dialogs: Sequence[DialogCandidate]) -> DPVerdict:
    roots = [d for d in all_dialogs]
    distinct = [
        d for d in roots if not any(is_ancestor_path(o.path, d.path) for o in roots if o is not d)
    ]
    return DPVerdict("DP7", len(distinct) >= 2, True, {"dialogs": [d.label for d in distinct]})


def _is_essential(label: str, lexicon: LexiconSet) -> bool:
    return any(phrase_pattern(p).search(label) for p in lexicon.phrases())


def dp8_preference_slider(clickables: Sequence[ClickableElement], essential: LexiconSet) -> DPVerdict:
    sliders = detect_preference_sliders(clickables)
    offending = [c.label for c, on in sliders if on and not _is_essential(c.label, essential)]
    return DPVerdict(
        "DP8",
        bool(offending),
        True,
        {"sliders": [{"label": c.label, "default_on": on} for c, on in sliders], "pre_enabled": offending},
    )


def _diff_rule(pattern: str, record: CrawlRecord, stage: Stage) -> DPVerdict:
    initial, after = record.stage(Stage.INITIAL), record.stage(stage)
    if initial is None:
        return na(pattern, "initial stage absent")
    if after is None:
        return na(pattern, f"{stage.value} stage absent", omitted=record.omitted_stages.get(stage))
    diff = stage_diff(initial.cookies, after.cookies)
    return DPVerdict(
        pattern,
        bool(diff.added),
        True,
        {
            "added": [list(c.key) for c in diff.added],
            "removed": [list(c.key) for c in diff.removed],
            "changed": [list(b.key) for b, _ in diff.changed],
        },
    )


def dp9_close_more_cookies(record: CrawlRecord) -> DPVerdict:
    return _diff_rule("DP9", record, Stage.CLOSE)


def dp10_opt_out_more_cookies(record: CrawlRecord) -> DPVerdict:
    return _diff_rule("DP10", record, Stage.OPT_OUT)


# -- newer rules ---------------------------------------------------------------------


def dp11_cookie_info_display(text: str, lexicon: LexiconSet) -> DPVerdict:
    hits = match_lexicon(normalize(text), lexicon, "exact")
    return DPVerdict("DP11", not hits, True, {"matched": sorted({m.phrase for m in hits})})


def dp12_purpose_info_display(text: str, lexicon: LexiconSet, config: RuleConfig) -> DPVerdict:
    hits = match_lexicon(normalize(text), lexicon, "exact+fuzzy", config.fuzzy_threshold)
    return DPVerdict(
        "DP12",
        not hits,
        True,
        {
            "categories": sorted({m.category for m in hits}),
            "matched": sorted({(m.phrase, m.mode.value, round(m.similarity, 4)) for m in hits}),
        },
    )


def _pricing_pair(text: str, lexicon: LexiconSet, window: int) -> Optional[Dict[str, Any]]:
    hits = match_lexicon(text, lexicon, "exact")
    pay = [m for m in hits if m.category == "Pay"]
    consent = [m for m in hits if m.category == "Consent"]
    best = None
    for p in pay:
        for c in consent:
            gap = max(0, max(p.position, c.position) - min(p.end, c.end))
            if gap <= window and (best is None or gap < best["gap"]):
                best = {"pay": p.phrase, "consent": c.phrase, "gap": gap}
    return best


def dp13_opt_out_pricing(dialog: DialogCandidate, lexicon: LexiconSet, config: RuleConfig) -> DPVerdict:
    texts = [normalize(dialog.extracted_text)]
    texts.extend(c.label for c in dialog.clickables if c.label)
    for scope, text in enumerate(texts):
        pair = _pricing_pair(text, lexicon, config.dp13_window)
        if pair is not None:
            pair["scope"] = "dialog_text" if scope == 0 else "clickable_label"
            return DPVerdict("DP13", True, True, pair)
    return DPVerdict("DP13", False, True, {"window": config.dp13_window})


def dp14_revocation_impossible(record: CrawlRecord) -> DPVerdict:
    rev = record.revocation
    if rev is None:
        return na("DP14", "revocation discovery did not run")
    return DPVerdict("DP14", rev.found_via is RevocationSource.NOT_FOUND, True, {"found_via": rev.found_via.value})


def dp15_revocation_hard(record: CrawlRecord, config: RuleConfig) -> DPVerdict:
    rev = record.revocation
    if rev is None or rev.found_via is RevocationSource.NOT_FOUND:
        return na("DP15", "no revocation mechanism found")
    cond: Dict[str, Optional[bool]] = {
        "C1": not rev.disclosure_on_first_page,
        "C2": None if rev.entry_steps is None else rev.entry_steps > config.max_entry_steps,
        "C3": None if rev.completion_interactions is None else rev.completion_interactions > config.max_completion_interactions,
        "C4": None
        if rev.completion_interactions is None or record.clicks_opt_in is None
        else rev.completion_interactions > record.clicks_opt_in,
    }
    hit = any(v for v in cond.values() if v is not None)
    return DPVerdict(
        "DP15",
        hit,
        True,
        {
            **cond,
            "unknown": [k for k, v in cond.items() if v is None],
            "entry_steps": rev.entry_steps,
            "completion_interactions": rev.completion_interactions,
            "clicks_opt_in": record.clicks_opt_in,
        },
    )


def dp16_pre_consent_cookies(record: CrawlRecord, config: RuleConfig, rules: Optional[SuffixRules] = None) -> DPVerdict:
    initial = record.stage(Stage.INITIAL)
    if initial is None:
        return na("DP16", "initial stage absent")
    part = partition_party(initial.cookies, record.final_url or record.requested_url, rules)
    now = initial.captured_at
    id_like = [c for c in initial.cookies if is_id_like(c, now)]
    standard = bool(part.third_party)
    strict = standard or bool(id_like)
    hit = strict if config.dp16_mode is Dp16Mode.STRICT else standard
    return DPVerdict(
        "DP16",
        hit,
        True,
        {
            "mode": config.dp16_mode.value,
            "third_party": [list(c.key) for c in part.third_party],
            "id_like": [{"key": list(c.key), "first_party": c in part.first_party} for c in id_like],
            "standard": standard,
            "strict": strict,
        },
    )


def dp17_legal_ambiguity(first_layer: str, subpages: Sequence[Tuple[str, bool]], lexicon: LexiconSet) -> DPVerdict:
    first = match_lexicon(normalize(first_layer), lexicon, "exact")
    activity = sorted({m.phrase for m in first if m.category == "Activity"})
    legal = sorted({m.phrase for m in first if m.category == "LegalBasis"})
    pages_legal: List[str] = []
    for text, ok in subpages:
        if ok:
            pages_legal.extend(m.phrase for m in match_lexicon(normalize(text), lexicon, "exact") if m.category == "LegalBasis")
    partial = any(not ok for _, ok in subpages)
    has_legal = bool(legal or pages_legal)
    return DPVerdict(
        "DP17",
        bool(activity) and not has_legal,
        True,
        {
            "activity": activity,
            "legal_first_layer": legal,
            "legal_subpages": sorted(set(pages_legal)),
            "partial_coverage": partial,
        },
    )


def dp18_fake_opt_out(record: CrawlRecord, trackers: TrackerList, rules: Optional[SuffixRules] = None) -> DPVerdict:
    stage = record.stage(Stage.OPT_OUT)
    if stage is None:
        return na("DP18", "opt-out stage absent", omitted=record.omitted_stages.get(Stage.OPT_OUT))
    part = partition_party(stage.cookies, record.final_url or record.requested_url, rules)
    tracked = match_trackers(part, trackers, rules)
    id_like = [c for c in stage.cookies if is_id_like(c, stage.captured_at)]
    return DPVerdict(
        "DP18",
        bool(part.third_party),
        True,
        {
            "first_party": len(part.first_party),
            "third_party": len(part.third_party),
            "id_like": len(id_like),
            "trackers": [{"key": list(c.key), "category": cat} for c, cat in tracked],
            "third_party_keys": [list(c.key) for c in part.third_party],
        },
    )


def dp19_multi_click_opt_out(clickables: Sequence[ClickableElement], record: CrawlRecord) -> DPVerdict:
    cats = categories(clickables)
    n_in, n_out = record.clicks_opt_in, record.clicks_opt_out
    evidence = {"clicks_opt_in": n_in, "clicks_opt_out": n_out, "opt_out_reachable": record.opt_out_reachable}
    has_in = bool(cats[Category.OPT_IN])
    if has_in and not cats[Category.OPT_OUT] and not cats[Category.MORE_OPTIONS]:
        return DPVerdict("DP19", True, True, {**evidence, "branch": "no_opt_out_offered"})
    if n_in is not None and n_out is not None:
        return DPVerdict("DP19", n_out > n_in, True, {**evidence, "branch": "click_counts"})
    if has_in and record.opt_out_reachable is False:
        return DPVerdict("DP19", True, True, {**evidence, "branch": "opt_out_unreachable"})
    return na("DP19", "click counts unmeasured", **evidence)


# -- orchestration -------------------------------------------------------------------


@dataclass(frozen=True)
class Resources:
    lexicons: Lexicons
    trackers: TrackerList
    suffix_rules: Optional[SuffixRules] = None

    @classmethod
    def default(cls) -> "Resources":
        return cls(Lexicons.shipped(), default_trackers())


NO_DIALOG = "no consent dialog"


def evaluate_all(
    record: CrawlRecord,
    dialog: Optional[DialogCandidate],
    all_dialogs: Sequence[DialogCandidate],
    config: RuleConfig = RuleConfig(),
    resources: Optional[Resources] = None,
    text: Optional[str] = None,
    warnings: Sequence[str] = (),
) -> DetectionReport:
    """Run DP1..DP19 in order. ``text`` is the (translated) dialog text when it
    differs from the extracted text."""
    res = resources or Resources.default()
    lex = res.lexicons
    initial = record.stage(Stage.INITIAL)
    shot = initial.screenshot if initial else None
    dialog_text = text if text is not None else (dialog.extracted_text if dialog else "")
    clickables = list(dialog.clickables) if dialog else []

    def guarded(pattern: str, fn: Callable[[], DPVerdict], needs_dialog: bool) -> DPVerdict:
        if needs_dialog and dialog is None:
            return na(pattern, NO_DIALOG)
        try:
            return fn()
        except Exception as exc:  # a failing rule must not take down the other eighteen
            return na(pattern, f"rule error: {type(exc).__name__}: {exc}")

    table: List[Tuple[str, Callable[[], DPVerdict], bool]] = [
        ("DP1", lambda: dp1_only_opt_in(clickables), True),
        ("DP2", lambda: dp2_highlighted_opt_in(dialog, shot, config), True),
        ("DP3", lambda: dp3_obstruct_window(dialog, shot, config), True),
        ("DP4", lambda: dp4_complex_text(dialog_text, config), True),
        ("DP5", lambda: dp5_more_options(clickables, record), True),
        ("DP6", lambda: dp6_ambiguous_close(clickables), True),
        ("DP7", lambda: dp7_multiple_dialogs(all_dialogs), True),
        ("DP8", lambda: dp8_preference_slider(clickables, lex.essential), True),
        ("DP9", lambda: dp9_close_more_cookies(record), False),
        ("DP10", lambda: dp10_opt_out_more_cookies(record), False),
        ("DP11", lambda: dp11_cookie_info_display(dialog_text, lex.dp11), True),
        ("DP12", lambda: dp12_purpose_info_display(dialog_text, lex.dp12, config), True),
        ("DP13", lambda: dp13_opt_out_pricing(dialog, lex.dp13, config), True),
        ("DP14", lambda: dp14_revocation_impossible(record), False),
        ("DP15", lambda: dp15_revocation_hard(record, config), False),
        ("DP16", lambda: dp16_pre_consent_cookies(record, config, res.suffix_rules), False),
        (
            "DP17",
            lambda: dp17_legal_ambiguity(dialog_text, [(p.text, p.ok) for p in record.subpages], lex.dp17),
            True,
        ),
        ("DP18", lambda: dp18_fake_opt_out(record, res.trackers, res.suffix_rules), False),
        ("DP19", lambda: dp19_multi_click_opt_out(clickables, record), True),
    ]
    if not record.load_ok:
        verdicts = tuple(na(p, "page did not load") for p, _, _ in table)
    else:
        verdicts = tuple(guarded(p, fn, needs) for p, fn, needs in table)
    return DetectionReport(
        site_url=record.requested_url,
        final_url=record.final_url,
        load_ok=record.load_ok,
        dialog_found=dialog is not None,
        verdicts=verdicts,
        captured_at=record.captured_at,
        warnings=tuple(warnings),
    )
