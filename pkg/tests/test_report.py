from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from consentlens.model import CookieRecord, SameSite
from consentlens.report import (
    compute_metrics,
    cookie_property_table,
    cookie_table_csv,
    int_percent,
    metrics_csv,
    metrics_from_counts,
    prevalence_csv,
    prevalence_table,
)
from consentlens.rules import DIALOG_RULES, PATTERNS, DetectionReport, DPVerdict

NOW = 1_700_000_000
YEAR = 365 * 86400


@given(st.integers(0, 10_000), st.integers(1, 10_000))
def test_int_percent_matches_fraction_oracle(k, n):
    exact = Fraction(100 * k, n)
    assert int_percent(k, n) == int(exact)  # floor for non-negatives
    assert int_percent(k, n, "half_up") == int(exact + Fraction(1, 2))


def test_int_percent_examples():
    assert int_percent(837, 838) == 99
    assert int_percent(4, 10) == 40
    assert int_percent(1, 8, "half_up") == 13 and int_percent(1, 8) == 12
    with pytest.raises(ValueError):
        int_percent(1, 0)
    with pytest.raises(ValueError):
        int_percent(1, 2, "banker")


def test_metrics_reference_counts():
    row = metrics_from_counts("DP1", tp=489, fp=2, fn=1, tn=8)
    assert round(row.accuracy, 3) == 0.994
    assert round(row.precision, 3) == 0.996
    assert round(row.recall, 3) == 0.998
    assert round(row.f1, 3) == 0.997


def test_metrics_degenerate_and_perfect():
    perfect = metrics_from_counts("DP2", 5, 0, 0, 5)
    assert (perfect.accuracy, perfect.precision, perfect.recall, perfect.f1) == (1, 1, 1, 1)
    none = metrics_from_counts("DP3", 0, 0, 0, 10)
    assert none.precision_undefined and none.recall_undefined and none.f1 == 0 and none.accuracy == 1
    with pytest.raises(ValueError):
        metrics_from_counts("DP4", 0, 0, 0, 0)


def test_compute_metrics_counts_and_site_mismatch():
    labels = {"DP1": {"a": True, "b": False, "c": True, "d": False}}
    preds = {"DP1": {"a": True, "b": True, "c": False, "d": False}}
    (row,) = compute_metrics(preds, labels)
    assert (row.tp, row.fp, row.fn, row.tn) == (1, 1, 1, 1)
    with pytest.raises(KeyError):
        compute_metrics({"DP1": {"a": True}}, labels)
    assert metrics_csv([row]).splitlines()[1] == "DP1,0.5000,0.5000,0.5000,0.5000"


def report(dialog: bool, triggered=(), load_ok=True, url="https://s/") -> DetectionReport:
    vs = []
    for p in PATTERNS:
        applicable = load_ok and (dialog or p not in DIALOG_RULES)
        vs.append(DPVerdict(p, applicable and p in triggered, applicable))
    return DetectionReport(url, url, load_ok, dialog, tuple(vs))


def test_prevalence_denominators():
    reports = [report(True, ("DP1", "DP16")) for _ in range(837)]
    reports += [report(True, ("DP16",))]
    reports += [report(False, ("DP16",)) for _ in range(2)]
    reports += [report(False, load_ok=False)]
    rows = {r.pattern: r for r in prevalence_table(reports, "EU")}
    assert (rows["DP1"].count, rows["DP1"].denominator, rows["DP1"].pct) == (837, 838, 99)
    assert (rows["DP16"].count, rows["DP16"].denominator, rows["DP16"].pct) == (840, 840, 100)
    csv_text = prevalence_csv(list(rows.values()))
    assert csv_text.splitlines()[0] == "Pattern,EU,Denominator"
    assert "Only Opt-In (DP1),837 (99%),838" in csv_text


def test_prevalence_four_of_ten():
    reports = [report(True, ("DP3",) if i < 4 else ()) for i in range(10)]
    rows = {r.pattern: r for r in prevalence_table(reports)}
    assert rows["DP3"].pct == 40
    with pytest.raises(ValueError):
        prevalence_table([])


def test_prevalence_zero_denominator_reports_zero():
    rows = {r.pattern: r for r in prevalence_table([report(False)])}
    assert (rows["DP1"].denominator, rows["DP1"].pct) == (0, 0)


def jar_1000():
    out = []
    same_site = [SameSite.UNSET] * 225 + [SameSite.LAX] * 105 + [SameSite.NONE] * 655 + [SameSite.STRICT] * 15
    for i in range(1000):
        out.append(
            CookieRecord(
                f"c{i}",
                "v",
                f"s{i % 40}.example.com" if i % 2 else f"t{i % 7}.example.org",
                secure=i < 760,
                http_only=i < 200,
                same_site=same_site[i],
                expiry=NOW + 2 * YEAR if i < 775 else NOW + 10,
            )
        )
    return out


def test_cookie_property_table_reference_shape():
    t = cookie_property_table(jar_1000(), NOW)
    assert t.total == 1000
    assert t.secure == (76, 24) and t.http_only == (20, 80)
    assert t.same_site == (22, 10, 65, 1)
    assert t.expires_gt_12mo == 77
    assert t.unique_domains == 2
    assert "Samesite (Null/Lax/None/Strict),22/10/65/1" in cookie_table_csv(t)


def test_cookie_table_half_up_differs_and_empty_rejected():
    assert cookie_property_table(jar_1000(), NOW, "half_up").same_site == (23, 11, 66, 2)
    with pytest.raises(ValueError):
        cookie_property_table([], NOW)


def test_cookie_expiry_uses_per_cookie_time():
    c = CookieRecord("a", "v", "x.com", expiry=NOW + YEAR + 5)
    assert cookie_property_table([c], NOW).expires_gt_12mo == 100
    assert cookie_property_table([c], 0, now_of=[NOW + 10]).expires_gt_12mo == 0
