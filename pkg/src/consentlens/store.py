"""SQLite persistence: six tables for sites, dialogs, clickables, cookies, verdicts, revocation."""

from __future__ import annotations

import json
import sqlite3
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

from .dialog import Extraction
from .model import (
    CookieRecord,
    CrawlRecord,
    SameSite,
    ScreenshotStore,
    Stage,
    deserialize_capture,
    serialize_capture,
)
from .rules import DetectionReport, DPVerdict

SCHEMA = """
CREATE TABLE IF NOT EXISTS sites (
    id INTEGER PRIMARY KEY,
    requested_url TEXT NOT NULL,
    final_url TEXT NOT NULL,
    load_ok INTEGER NOT NULL,
    robots_allowed INTEGER NOT NULL,
    language TEXT,
    translation_applied INTEGER NOT NULL,
    captured_at INTEGER NOT NULL,
    clicks_opt_in INTEGER,
    clicks_opt_out INTEGER,
    dialog_found INTEGER,
    warnings TEXT NOT NULL DEFAULT '[]',
    snapshot BLOB NOT NULL,
    UNIQUE (requested_url, captured_at)
);
CREATE TABLE IF NOT EXISTS dialogs (
    id INTEGER PRIMARY KEY,
    site_id INTEGER NOT NULL REFERENCES sites(id) ON DELETE CASCADE,
    is_active INTEGER NOT NULL,
    label TEXT NOT NULL,
    matched_by TEXT NOT NULL,
    score REAL NOT NULL,
    text_density REAL,
    z_visibility REAL,
    structural_uniqueness REAL,
    text TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS clickables (
    id INTEGER PRIMARY KEY,
    dialog_id INTEGER NOT NULL REFERENCES dialogs(id) ON DELETE CASCADE,
    category TEXT NOT NULL,
    label TEXT NOT NULL,
    x REAL, y REAL, width REAL, height REAL,
    style TEXT NOT NULL,
    matched_phrase TEXT,
    default_on INTEGER
);
CREATE TABLE IF NOT EXISTS cookies (
    id INTEGER PRIMARY KEY,
    site_id INTEGER NOT NULL REFERENCES sites(id) ON DELETE CASCADE,
    stage TEXT NOT NULL,
    name TEXT NOT NULL,
    value TEXT NOT NULL,
    host TEXT NOT NULL,
    path TEXT NOT NULL,
    secure INTEGER NOT NULL,
    http_only INTEGER NOT NULL,
    same_site TEXT NOT NULL,
    expiry INTEGER
);
CREATE TABLE IF NOT EXISTS verdicts (
    site_id INTEGER NOT NULL REFERENCES sites(id) ON DELETE CASCADE,
    pattern TEXT NOT NULL,
    triggered INTEGER NOT NULL,
    applicable INTEGER NOT NULL,
    evidence TEXT NOT NULL,
    reason TEXT,
    PRIMARY KEY (site_id, pattern)
);
CREATE TABLE IF NOT EXISTS revocation (
    site_id INTEGER PRIMARY KEY REFERENCES sites(id) ON DELETE CASCADE,
    found_via TEXT NOT NULL,
    entry_steps INTEGER,
    completion_interactions INTEGER,
    disclosure_on_first_page INTEGER NOT NULL
);
"""

TABLES = ("sites", "dialogs", "clickables", "cookies", "verdicts", "revocation")


def screenshot_dir(db_path: Path) -> Path:
    p = Path(db_path)
    return p.with_name(p.name + ".screenshots")


def open_store(path: Path | str) -> sqlite3.Connection:
    conn = sqlite3.connect(str(path))
    conn.execute("PRAGMA foreign_keys = ON")
    conn.executescript(SCHEMA)
    return conn


def store_screenshots(conn: sqlite3.Connection) -> ScreenshotStore:
    row = conn.execute("PRAGMA database_list").fetchone()
    file = row[2] if row else ""
    return ScreenshotStore(screenshot_dir(Path(file)) if file else None)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def persist(
    conn: sqlite3.Connection,
    record: CrawlRecord,
    report: Optional[DetectionReport] = None,
    extraction: Optional[Extraction] = None,
    shots: Optional[ScreenshotStore] = None,
) -> int:
    """Write one site. Re-persisting the same (url, capture time) replaces the old rows."""
    shots = shots if shots is not None else store_screenshots(conn)
    snapshot = serialize_capture(record, shots)
    with conn:
        conn.execute(
            "DELETE FROM sites WHERE requested_url = ? AND captured_at = ?",
            (record.requested_url, record.captured_at),
        )
        cur = conn.execute(
            """INSERT INTO sites (requested_url, final_url, load_ok, robots_allowed, language,
                   translation_applied, captured_at, clicks_opt_in, clicks_opt_out, dialog_found,
                   warnings, snapshot)
               VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)""",
            (
                record.requested_url,
                record.final_url,
                int(record.load_ok),
                int(record.robots_allowed),
                record.detected_language,
                int(record.translation_applied),
                record.captured_at,
                record.clicks_opt_in,
                record.clicks_opt_out,
                None if report is None else int(report.dialog_found),
                _json(list(report.warnings) if report else []),
                snapshot,
            ),
        )
        site_id = int(cur.lastrowid)
        for stage, cap in record.stages.items():
            conn.executemany(
                """INSERT INTO cookies (site_id, stage, name, value, host, path, secure, http_only, same_site, expiry)
                   VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)""",
                [
                    (site_id, stage.value, c.name, c.value, c.host, c.path, int(c.secure), int(c.http_only), c.same_site.value, c.expiry)
                    for c in cap.cookies
                ],
            )
        if extraction is not None:
            _write_dialogs(conn, site_id, extraction)
        if report is not None:
            _write_verdicts(conn, site_id, report)
        rev = record.revocation
        if rev is not None:
            conn.execute(
                "INSERT INTO revocation VALUES (?, ?, ?, ?, ?)",
                (site_id, rev.found_via.value, rev.entry_steps, rev.completion_interactions, int(rev.disclosure_on_first_page)),
            )
    return site_id


def _write_dialogs(conn: sqlite3.Connection, site_id: int, extraction: Extraction) -> None:
    active_path = extraction.active.path if extraction.active else None
    for d in extraction.all_visible:
        comp = d.score_components
        cur = conn.execute(
            """INSERT INTO dialogs (site_id, is_active, label, matched_by, score, text_density,
                   z_visibility, structural_uniqueness, text) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)""",
            (
                site_id,
                int(d.path == active_path),
                d.label,
                _json(sorted(m.value for m in d.matched_by)),
                d.score,
                comp.text_density if comp else None,
                comp.z_visibility if comp else None,
                comp.structural_uniqueness if comp else None,
                d.extracted_text,
            ),
        )
        dialog_id = cur.lastrowid
        for c in d.clickables:
            box = c.box
            conn.execute(
                """INSERT INTO clickables (dialog_id, category, label, x, y, width, height, style, matched_phrase, default_on)
                   VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)""",
                (
                    dialog_id,
                    c.category.value,
                    c.label,
                    box.x if box else None,
                    box.y if box else None,
                    box.width if box else None,
                    box.height if box else None,
                    _json(
                        {
                            "z_index": c.style.z_index,
                            "position": c.style.position.value,
                            "background_rgb": c.style.background_rgb,
                            "color_rgb": c.style.color_rgb,
                        }
                    ),
                    c.matched_phrase,
                    None if c.default_on is None else int(c.default_on),
                ),
            )


def _write_verdicts(conn: sqlite3.Connection, site_id: int, report: DetectionReport) -> None:
    conn.executemany(
        "INSERT INTO verdicts VALUES (?, ?, ?, ?, ?, ?)",
        [(site_id, v.pattern, int(v.triggered), int(v.applicable), _json(v.evidence), v.reason) for v in report.verdicts],
    )


def replace_detection(conn: sqlite3.Connection, site_id: int, report: DetectionReport, extraction: Optional[Extraction]) -> None:
    """Swap the detection outputs of an already stored site (used by re-detection)."""
    with conn:
        conn.execute("DELETE FROM verdicts WHERE site_id = ?", (site_id,))
        conn.execute("DELETE FROM dialogs WHERE site_id = ?", (site_id,))
        conn.execute(
            "UPDATE sites SET dialog_found = ?, warnings = ? WHERE id = ?",
            (int(report.dialog_found), _json(list(report.warnings)), site_id),
        )
        if extraction is not None:
            _write_dialogs(conn, site_id, extraction)
        _write_verdicts(conn, site_id, report)


def site_ids(conn: sqlite3.Connection) -> List[int]:
    return [r[0] for r in conn.execute("SELECT id FROM sites ORDER BY id")]


def load_record(conn: sqlite3.Connection, site_id: int, shots: Optional[ScreenshotStore] = None) -> CrawlRecord:
    row = conn.execute("SELECT snapshot FROM sites WHERE id = ?", (site_id,)).fetchone()
    if row is None:
        raise KeyError(f"no site with id {site_id}")
    return deserialize_capture(bytes(row[0]), shots if shots is not None else store_screenshots(conn))


def load_report(conn: sqlite3.Connection, site_id: int) -> Optional[DetectionReport]:
    site = conn.execute(
        "SELECT requested_url, final_url, load_ok, dialog_found, captured_at, warnings FROM sites WHERE id = ?",
        (site_id,),
    ).fetchone()
    if site is None:
        raise KeyError(f"no site with id {site_id}")
    rows = conn.execute(
        "SELECT pattern, triggered, applicable, evidence, reason FROM verdicts WHERE site_id = ?",
        (site_id,),
    ).fetchall()
    if not rows:
        return None
    order = {f"DP{i}": i for i in range(1, 20)}
    rows.sort(key=lambda r: order.get(r[0], 99))
    verdicts = tuple(DPVerdict(p, bool(t), bool(a), json.loads(e), r) for p, t, a, e, r in rows)
    return DetectionReport(
        site_url=site[0],
        final_url=site[1],
        load_ok=bool(site[2]),
        dialog_found=bool(site[3]),
        verdicts=verdicts,
        captured_at=int(site[4]),
        warnings=tuple(json.loads(site[5])),
    )


def iter_reports(conn: sqlite3.Connection) -> Iterator[Tuple[int, DetectionReport]]:
    for sid in site_ids(conn):
        rep = load_report(conn, sid)
        if rep is not None:
            yield sid, rep


def all_cookies(conn: sqlite3.Connection, dedupe: bool = True) -> List[Tuple[int, CookieRecord]]:
    """Cookie observations. With ``dedupe`` each (site, name, host, path) counts once,
    taking its earliest stage observation."""
    rank = {s.value: i for i, s in enumerate(Stage)}
    rows = conn.execute(
        "SELECT site_id, stage, name, value, host, path, secure, http_only, same_site, expiry FROM cookies ORDER BY id"
    ).fetchall()
    rows.sort(key=lambda r: (r[0], rank[r[1]]))
    out, seen = [], set()
    for sid, stage, name, value, host, path, secure, http_only, same_site, expiry in rows:
        key = (sid, name, host, path)
        if dedupe and key in seen:
            continue
        seen.add(key)
        out.append(
            (sid, CookieRecord(name, value, host, path, bool(secure), bool(http_only), SameSite(same_site), expiry, Stage(stage)))
        )
    return out


def capture_time(conn: sqlite3.Connection, site_id: int) -> int:
    return int(conn.execute("SELECT captured_at FROM sites WHERE id = ?", (site_id,)).fetchone()[0])
