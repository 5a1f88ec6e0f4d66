"""Evaluation metrics, prevalence and cookie-property tables, CSV export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

from .cookies import YEAR_SECONDS
from .model import CookieRecord, SameSite
from .psl import SuffixRules, registrable_domain
from .rules import DIALOG_RULES, PATTERNS, DetectionReport


def int_percent(count: int, total: int, rounding: str = "floor") -> int:
    """Integer percentage computed exactly. ``floor`` truncates, ``half_up`` rounds .5 up."""
    if total <= 0:
        raise ValueError("total must be > 0")
    if rounding == "floor":
        return (100 * count) // total
    if rounding == "half_up":
        return (200 * count + total) // (2 * total)
    raise ValueError(f"unknown rounding {rounding!r}")


# -- metrics ------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricRow:
    pattern: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    precision_undefined: bool = False
    recall_undefined: bool = False


def metrics_from_counts(pattern: str, tp: int, fp: int, fn: int, tn: int) -> MetricRow:
    total = tp + fp + fn + tn
    if total == 0:
        raise ValueError(f"{pattern}: no samples")
    p_undef, r_undef = tp + fp == 0, tp + fn == 0
    precision = 0.0 if p_undef else tp / (tp + fp)
    recall = 0.0 if r_undef else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return MetricRow(pattern, (tp + tn) / total, precision, recall, f1, tp, fp, fn, tn, p_undef, r_undef)


def compute_metrics(
    predictions: Mapping[str, Mapping[str, bool]],
    labels: Mapping[str, Mapping[str, bool]],
) -> List[MetricRow]:
    """Both arguments map pattern -> site -> bool."""
    rows = []
    for pattern in sorted(labels, key=_pattern_key):
        lab = labels[pattern]
        pred = predictions.get(pattern, {})
        missing = sorted(set(lab) ^ set(pred))
        if missing:
            raise KeyError(f"{pattern}: site sets differ: {missing}")
        tp = sum(1 for s in lab if lab[s] and pred[s])
        fp = sum(1 for s in lab if not lab[s] and pred[s])
        fn = sum(1 for s in lab if lab[s] and not pred[s])
        tn = sum(1 for s in lab if not lab[s] and not pred[s])
        rows.append(metrics_from_counts(pattern, tp, fp, fn, tn))
    return rows


def _pattern_key(p: str) -> Tuple[int, str]:
    return (int(p[2:]), p) if p.startswith("DP") and p[2:].isdigit() else (999, p)


# -- prevalence -----------------------------------------------------------------------


@dataclass(frozen=True)
class PrevalenceRow:
    pattern: str
    count: int
    denominator: int
    pct: int
    region: str = ""


def prevalence_table(reports: Sequence[DetectionReport], region: str = "", rounding: str = "floor") -> List[PrevalenceRow]:
    if not reports:
        raise ValueError("prevalence_table needs at least one report")
    loaded = [r for r in reports if r.load_ok]
    with_dialog = [r for r in loaded if r.dialog_found]
    rows = []
    for pattern in PATTERNS:
        base = with_dialog if pattern in DIALOG_RULES else loaded
        count = sum(1 for r in base if r.verdict(pattern).triggered)
        denominator = len(base)
        pct = int_percent(count, denominator, rounding) if denominator else 0
        rows.append(PrevalenceRow(pattern, count, max(denominator, 0), pct, region))
    return rows


PATTERN_NAMES = {
    "DP1": "Only Opt-In",
    "DP2": "Highlighted Opt-In",
    "DP3": "Obstruct Window",
    "DP4": "Complex Text",
    "DP5": "More Options",
    "DP6": "Ambiguous Close",
    "DP7": "Multiple Dialogs",
    "DP8": "Preference Slider",
    "DP9": "Close More Cookies",
    "DP10": "Opt-Out More Cookies",
    "DP11": "Cookie Info Display",
    "DP12": "Purpose Info Display",
    "DP13": "Opt-Out Pricing",
    "DP14": "Revocation Impossible",
    "DP15": "Revocation Hard",
    "DP16": "Pre-Consent Cookies",
    "DP17": "Legal Ambiguity",
    "DP18": "Fake Opt-Out",
    "DP19": "Multi-Click Opt-Out",
}


def prevalence_csv(rows: Sequence[PrevalenceRow]) -> str:
    region = rows[0].region if rows else ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Pattern", region or "Sites", "Denominator"])
    for r in rows:
        w.writerow([f"{PATTERN_NAMES[r.pattern]} ({r.pattern})", f"{r.count} ({r.pct}%)", r.denominator])
    return buf.getvalue()


# -- cookie properties -------------------------------------------------------------------

SAME_SITE_ORDER = (SameSite.UNSET, SameSite.LAX, SameSite.NONE, SameSite.STRICT)


@dataclass(frozen=True)
class CookiePropertyTable:
    total: int
    unique_domains: int
    secure: Tuple[int, int]
    http_only: Tuple[int, int]
    same_site: Tuple[int, int, int, int]  # Null/Lax/None/Strict
    expires_gt_12mo: int

    def rows(self) -> List[Tuple[str, str]]:
        return [
            ("Total Cookies", str(self.total)),
            ("Unique domains", str(self.unique_domains)),
            ("Secure (T/F)", "/".join(map(str, self.secure))),
            ("HttpOnly (T/F)", "/".join(map(str, self.http_only))),
            ("Samesite (Null/Lax/None/Strict)", "/".join(map(str, self.same_site))),
            ("Expires > 12 Months", str(self.expires_gt_12mo)),
        ]


def cookie_property_table(
    cookies: Sequence[CookieRecord],
    now: int,
    rounding: str = "floor",
    rules: Optional[SuffixRules] = None,
    now_of: Optional[Sequence[int]] = None,
) -> CookiePropertyTable:
    """Percentages over all cookies. ``now_of`` optionally gives a per-cookie reference time."""
    n = len(cookies)
    if n == 0:
        raise ValueError("cookie_property_table needs at least one cookie")

    def pct(k: int) -> int:
        return int_percent(k, n, rounding)

    secure = sum(c.secure for c in cookies)
    http_only = sum(c.http_only for c in cookies)
    ss = {s: sum(1 for c in cookies if c.same_site is s) for s in SAME_SITE_ORDER}
    times = list(now_of) if now_of is not None else [int(now)] * n
    long_lived = sum(1 for c, t in zip(cookies, times) if c.expiry is not None and c.expiry - t > YEAR_SECONDS)
    domains = {registrable_domain(c.host, rules) for c in cookies}
    return CookiePropertyTable(
        total=n,
        unique_domains=len(domains),
        secure=(pct(secure), pct(n - secure)),
        http_only=(pct(http_only), pct(n - http_only)),
        same_site=tuple(pct(ss[s]) for s in SAME_SITE_ORDER),
        expires_gt_12mo=pct(long_lived),
    )


def cookie_table_csv(table: CookiePropertyTable, column: str = "Dataset") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Rank", column])
    for label, value in table.rows():
        w.writerow([label, value])
    return buf.getvalue()


def metrics_csv(rows: Sequence[MetricRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Dark Pattern", "Accuracy", "Precision", "Recall", "F1-score"])
    for r in rows:
        w.writerow([r.pattern, f"{r.accuracy:.4f}", f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}"])
    return buf.getvalue()
