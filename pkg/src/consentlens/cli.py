"""Command line entry point: capture, detect, report, lexicon."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from .clickables import default_keyword_map, load_keyword_map
from .cookies import TrackerList
from .model import SchemaVersionError, SnapshotParseError, load_snapshot
from .pipeline import DetectOptions, detect
from .report import (
    compute_metrics,
    cookie_property_table,
    cookie_table_csv,
    metrics_csv,
    prevalence_csv,
    prevalence_table,
)
from .rules import PATTERNS, Lexicons, Resources, RuleConfig
from .selectors import SelectorError, parse_selector_list
from .store import all_cookies, capture_time, iter_reports, load_record, open_store, persist, replace_detection, site_ids
from .text import LexiconSet, normalize

log = logging.getLogger("consentlens")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2

LEXICON_FILES = {
    "dp11": "dp11_definitions",
    "dp12": "dp12_purposes",
    "dp13": "dp13_pricing",
    "dp17": "dp17_legal",
}


class UsageError(Exception):
    """Bad arguments or configuration; maps to exit code 2."""


class Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse already exits 2; keep that explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- shared option handling --------------------------------------------------------------


def _add_rule_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("rule thresholds")
    g.add_argument("--config", type=Path, help="JSON or TOML file with rule thresholds")
    g.add_argument("--dp16-mode", choices=["standard", "strict"])
    g.add_argument("--flesch-max", type=float)
    g.add_argument("--contrast-threshold", type=float)
    g.add_argument("--coverage-threshold", type=float)
    g.add_argument("--fuzzy-threshold", type=float)
    g.add_argument("--max-entry-steps", type=int)
    g.add_argument("--max-completion-interactions", type=int)
    g.add_argument("--dp13-window", type=int)
    g.add_argument("--selectors", type=Path, help="CMP selector list, one CSS selector per line")
    g.add_argument("--keywords", type=Path, help="JSON {category: [phrases]} merged over the built-in clickable map")
    g.add_argument("--trackers", type=Path, help="tracker list in Disconnect services.json layout")
    g.add_argument("--lexicon-dir", type=Path, help="directory with replacement lexicon JSON files")


_OVERRIDES = (
    "dp16_mode",
    "flesch_max",
    "contrast_threshold",
    "coverage_threshold",
    "fuzzy_threshold",
    "max_entry_steps",
    "max_completion_interactions",
    "dp13_window",
)


def build_config(args: argparse.Namespace) -> RuleConfig:
    try:
        cfg = RuleConfig.load(args.config) if args.config else RuleConfig()
        overrides = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}
        if getattr(args, "settle", None) is not None:
            overrides["settle_seconds"] = args.settle
        return replace(cfg, **overrides) if overrides else cfg
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad configuration: {exc}") from exc


def build_options(args: argparse.Namespace) -> DetectOptions:
    config = build_config(args)
    try:
        lexicons = Lexicons.shipped()
        if args.lexicon_dir:
            updates = {}
            for attr, stem in LEXICON_FILES.items():
                path = args.lexicon_dir / f"{stem}.json"
                if path.exists():
                    updates[attr] = LexiconSet.load(path)
            lexicons = replace(lexicons, **updates)
        resources_ = Resources.default()
        trackers = TrackerList.load(args.trackers) if args.trackers else resources_.trackers
        resources_ = replace(resources_, lexicons=lexicons, trackers=trackers)
        selectors = parse_selector_list(args.selectors.read_text(encoding="utf-8")) if args.selectors else None
        keyword_map = None
        if args.keywords:
            keyword_map = load_keyword_map(json.loads(args.keywords.read_text(encoding="utf-8")), default_keyword_map())
    except (OSError, ValueError, KeyError, SelectorError) as exc:
        raise UsageError(f"bad resource file: {exc}") from exc
    return DetectOptions(config=config, resources=resources_, selector_list=selectors, keyword_map=keyword_map)


# -- capture ------------------------------------------------------------------------------------


def read_url_list(path: str) -> List[str]:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    urls = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "://" not in line:
            line = "https://" + line
        urls.append(line)
    return urls


def cmd_capture(args: argparse.Namespace) -> int:
    from .harness.capture import CaptureConfig, capture_many, default_capabilities

    try:
        urls = read_url_list(args.url_list)
    except OSError as exc:
        raise UsageError(f"cannot read url list: {exc}") from exc
    if not urls:
        raise UsageError("url list is empty")
    opts = build_options(args)
    caps = default_capabilities()
    if args.capabilities:
        try:
            caps = json.loads(args.capabilities.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad capabilities file: {exc}") from exc
    cfg = CaptureConfig(
        webdriver_url=args.webdriver,
        capabilities=caps,
        settle_seconds=float(opts.config.settle_seconds),
        ui_settle_seconds=args.ui_settle,
        max_click_depth=args.max_click_depth,
        respect_robots=not args.no_robots,
        selector_list=opts.selector_list,
        keyword_map=opts.keyword_map,
    )
    conn = open_store(args.out)
    failed = 0
    for url, record, error in capture_many(urls, cfg, args.workers):
        if record is None:
            failed += 1
            print(json.dumps({"site_url": url, "error": str(error)}), flush=True)
            continue
        if not record.load_ok and record.robots_allowed:
            failed += 1
        report, extraction = detect(record, opts)
        persist(conn, record, report, extraction)
        summary = {
            "site_url": url,
            "load_ok": record.load_ok,
            "robots_allowed": record.robots_allowed,
            "stages": [s.value for s in record.stages],
            "triggered": report.triggered(),
        }
        print(json.dumps(summary), flush=True)
    conn.close()
    return EXIT_PARTIAL if failed else EXIT_OK


# -- detect -------------------------------------------------------------------------------------


def _verdict_line(report) -> str:
    return json.dumps(report.to_json(), sort_keys=True, ensure_ascii=False)


def cmd_detect(args: argparse.Namespace) -> int:
    opts = build_options(args)
    target: Path = args.target
    failed = 0
    if target.is_dir():
        conn = open_store(args.store) if args.store else None
        files = sorted(p for p in target.glob("*.json"))
        if not files:
            raise UsageError(f"no snapshot files in {target}")
        for path in files:
            try:
                record = load_snapshot(path)
            except (SnapshotParseError, SchemaVersionError, OSError, KeyError) as exc:
                failed += 1
                print(json.dumps({"snapshot": path.name, "error": str(exc)}), flush=True)
                continue
            report, extraction = detect(record, opts)
            if conn is not None:
                persist(conn, record, report, extraction)
            print(_verdict_line(report), flush=True)
        if conn is not None:
            conn.close()
    elif target.is_file():
        conn = open_store(target)
        ids = site_ids(conn)
        if not ids:
            raise UsageError(f"store {target} holds no sites")
        for sid in ids:
            try:
                record = load_record(conn, sid)
            except (SnapshotParseError, SchemaVersionError, KeyError, ValueError) as exc:
                failed += 1
                print(json.dumps({"site_id": sid, "error": str(exc)}), flush=True)
                continue
            report, extraction = detect(record, opts)
            replace_detection(conn, sid, report, extraction)
            print(_verdict_line(report), flush=True)
        conn.close()
    else:
        raise UsageError(f"{target} is neither a store file nor a snapshot directory")
    return EXIT_PARTIAL if failed else EXIT_OK


# -- report -------------------------------------------------------------------------------------


def load_labels(path: Path) -> Dict[str, Dict[str, bool]]:
    """Labels file: {"sites": {url: {"DP1": bool, ...}}} (the "sites" wrapper is optional).
    Returns pattern -> site -> bool."""
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read labels: {exc}") from exc
    sites = doc.get("sites", doc) if isinstance(doc, dict) else None
    if not isinstance(sites, dict):
        raise UsageError("labels must map site urls to pattern labels")
    out: Dict[str, Dict[str, bool]] = {}
    for site, labels in sites.items():
        for pattern, value in labels.items():
            if pattern not in PATTERNS:
                raise UsageError(f"unknown pattern {pattern!r} in labels for {site}")
            if not isinstance(value, bool):
                raise UsageError(f"label {site}/{pattern} must be true or false")
            out.setdefault(pattern, {})[site] = value
    return out


def _emit(text: str, csv_path: Optional[Path]) -> None:
    if csv_path:
        csv_path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_report(args: argparse.Namespace) -> int:
    if args.table == "metrics" and not args.labels:
        raise UsageError("--table metrics requires --labels")
    if not args.store.is_file():
        raise UsageError(f"no store at {args.store}")
    conn = open_store(args.store)
    try:
        reports = [r for _, r in iter_reports(conn)]
        if args.table == "prevalence":
            if not reports:
                raise UsageError("store holds no detection results; run detect first")
            _emit(prevalence_csv(prevalence_table(reports, args.region, args.rounding)), args.csv)
        elif args.table == "cookies":
            rows = all_cookies(conn, dedupe=not args.all_observations)
            if not rows:
                raise UsageError("store holds no cookies")
            times = {sid: capture_time(conn, sid) for sid in {sid for sid, _ in rows}}
            table = cookie_property_table(
                [c for _, c in rows], 0, args.rounding, now_of=[times[sid] for sid, _ in rows]
            )
            _emit(cookie_table_csv(table, args.region or "Dataset"), args.csv)
        else:
            labels = load_labels(args.labels)
            by_site = {r.site_url: r for r in reports}
            predictions: Dict[str, Dict[str, bool]] = {}
            for pattern, sites in labels.items():
                missing = sorted(s for s in sites if s not in by_site)
                if missing:
                    raise UsageError(f"labelled sites without results: {missing[:5]}")
                predictions[pattern] = {s: by_site[s].verdict(pattern).triggered for s in sites}
            _emit(metrics_csv(compute_metrics(predictions, labels)), args.csv)
    finally:
        conn.close()
    return EXIT_OK


# -- lexicon ------------------------------------------------------------------------------------


def _reference() -> Mapping[str, Mapping[str, List[str]]]:
    return json.loads(resources.files("consentlens.data").joinpath("lexicon_reference.json").read_text(encoding="utf-8"))


def validate_lexicons(directory: Optional[Path] = None) -> Dict[str, Dict[str, list]]:
    """Compare lexicon files with the reference phrase lists; returns per-file missing/extra."""
    results = {}
    for stem, cats in _reference().items():
        if directory is not None:
            lex = LexiconSet.load(directory / f"{stem}.json")
        else:
            lex = LexiconSet.from_json(json.loads(resources.files("consentlens.data").joinpath(f"{stem}.json").read_text(encoding="utf-8")))
        expected = {(normalize(p), cat) for cat, phrases in cats.items() for p in phrases}
        actual = set(lex.entries)
        results[stem] = {
            "entries": len(actual),
            "missing": sorted(expected - actual),
            "extra": sorted(actual - expected),
        }
    return results


def cmd_lexicon(args: argparse.Namespace) -> int:
    try:
        results = validate_lexicons(args.dir)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load lexicons: {exc}") from exc
    bad = False
    for stem, r in results.items():
        ok = not r["missing"] and not r["extra"]
        bad |= not ok
        print(f"{stem}: {r['entries']} entries, {len(r['missing'])} missing, {len(r['extra'])} extra -> {'ok' if ok else 'MISMATCH'}")
        for phrase, cat in r["missing"]:
            print(f"  missing [{cat}] {phrase}")
        for phrase, cat in r["extra"]:
            print(f"  extra   [{cat}] {phrase}")
    return EXIT_PARTIAL if bad else EXIT_OK


# -- parser -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = Parser(prog="consentlens", description="Cookie-consent capture and dark-pattern detection.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    cap = sub.add_parser("capture", help="crawl sites and store four-stage captures")
    cap.add_argument("url_list", help="file with one url per line, or - for stdin")
    cap.add_argument("--webdriver", default=os.environ.get("CONSENTLENS_WEBDRIVER", "http://127.0.0.1:9515"))
    cap.add_argument("--capabilities", type=Path, help="JSON capabilities for new sessions")
    cap.add_argument("--out", type=Path, default=Path("consentlens.db"), help="SQLite store to write")
    cap.add_argument("--workers", type=int, default=1)
    cap.add_argument("--no-robots", action="store_true", help="do not consult robots.txt")
    cap.add_argument("--settle", type=int, help="seconds to wait before each stage snapshot")
    cap.add_argument("--ui-settle", type=float, default=1.0, help="seconds to wait after each click")
    cap.add_argument("--max-click-depth", type=int, default=4)
    _add_rule_options(cap)
    cap.set_defaults(func=cmd_capture)

    det = sub.add_parser("detect", help="run the 19 rules over stored captures")
    det.add_argument("target", type=Path, help="SQLite store or directory of snapshot JSON files")
    det.add_argument("--store", type=Path, help="with a snapshot directory: also persist into this store")
    _add_rule_options(det)
    det.set_defaults(func=cmd_detect)

    rep = sub.add_parser("report", help="tables over a store")
    rep.add_argument("store", type=Path)
    rep.add_argument("--table", required=True, choices=["prevalence", "cookies", "metrics"])
    rep.add_argument("--labels", type=Path, help="ground-truth labels (required for metrics)")
    rep.add_argument("--csv", type=Path, help="write CSV here instead of stdout")
    rep.add_argument("--region", default="", help="column label for the table")
    rep.add_argument("--rounding", choices=["floor", "half_up"], default="floor")
    rep.add_argument("--all-observations", action="store_true", help="cookie table: count every stage observation")
    rep.set_defaults(func=cmd_report)

    lex = sub.add_parser("lexicon", help="lexicon utilities")
    lex_sub = lex.add_subparsers(dest="lexicon_command", required=True, parser_class=Parser)
    val = lex_sub.add_parser("validate", help="check lexicon files against the reference phrase lists")
    val.add_argument("--dir", type=Path, help="directory of lexicon JSON files (default: shipped files)")
    val.set_defaults(func=cmd_lexicon)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"consentlens: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
