from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

from consentlens.model import (
    CookieRecord,
    CrawlRecord,
    RenderBox,
    RevocationInfo,
    RevocationSource,
    SchemaVersionError,
    Screenshot,
    ScreenshotStore,
    SnapshotParseError,
    Stage,
    StageCapture,
    deserialize_capture,
    load_snapshot,
    node,
    save_snapshot,
    serialize_capture,
    validate_crawl_record,
)

from .strategies import crawl_records


def minimal(cookies=()) -> CrawlRecord:
    cap = StageCapture(Stage.INITIAL, node("html"), Screenshot.solid(4, 3), tuple(cookies), 1_700_000_000)
    return CrawlRecord("https://a.example/", "https://a.example/", True, {Stage.INITIAL: cap})


def test_stage_order_puts_initial_first():
    assert Stage.INITIAL.order < Stage.OPT_IN.order
    assert Stage.OPT_IN.order == Stage.OPT_OUT.order == Stage.CLOSE.order
    assert [s.value for s in Stage] == ["initial", "opt_in", "opt_out", "close"]


def test_negative_box_size_is_a_violation():
    cap = StageCapture(Stage.INITIAL, node("html", box=RenderBox(0, 0, -1, 5)), Screenshot.solid(4, 3))
    rec = CrawlRecord("https://a.example/", "https://a.example/", True, {Stage.INITIAL: cap})
    assert [v.message for v in validate_crawl_record(rec)] == ["box width/height must be >= 0"]


def test_render_box_geometry():
    a, b = RenderBox(0, 0, 10, 10), RenderBox(5, 5, 10, 10)
    assert a.area == 100 and a.right == 10 and a.bottom == 10
    assert a.intersects(b) and not a.intersects(RenderBox(10, 0, 5, 5))
    assert a.translated(3, 4) == RenderBox(3, 4, 10, 10)


def test_valid_minimal_record_has_no_violations():
    assert validate_crawl_record(minimal()) == []


def test_load_ok_without_initial_stage_is_one_violation():
    rec = CrawlRecord("https://a.example/", "https://a.example/", True)
    v = validate_crawl_record(rec)
    assert len(v) == 1 and v[0].field == "stages"


def test_failed_load_without_stages_is_valid():
    assert validate_crawl_record(CrawlRecord("https://a.example/", "https://a.example/", False)) == []


def test_empty_cookie_host_is_named():
    v = validate_crawl_record(minimal([CookieRecord("a", "1", "")]))
    assert len(v) == 1 and "cookies[0]" in v[0].field


def test_uppercase_host_and_zero_clicks_are_violations():
    rec = minimal([CookieRecord("a", "1", "Example.COM")])
    rec = CrawlRecord(rec.requested_url, rec.final_url, True, rec.stages, clicks_opt_in=0)
    fields = {v.field for v in validate_crawl_record(rec)}
    assert "clicks_opt_in" in fields and any("cookies[0]" in f for f in fields)


def test_not_found_revocation_must_not_carry_counts():
    rec = minimal()
    bad = CrawlRecord(rec.requested_url, rec.final_url, True, rec.stages, revocation=RevocationInfo(RevocationSource.NOT_FOUND, 1, None))
    assert [v.field for v in validate_crawl_record(bad)] == ["revocation"]


def test_insecure_samesite_none_cookie_is_still_valid():
    from consentlens.model import SameSite

    assert validate_crawl_record(minimal([CookieRecord("a", "1", "x.example", secure=False, same_site=SameSite.NONE)])) == []


def test_minimal_record_reserializes_byte_exact():
    store = ScreenshotStore()
    data = serialize_capture(minimal(), store)
    assert serialize_capture(deserialize_capture(data, store), store) == data


def test_truncated_stream_is_parse_error_not_partial_record():
    data = serialize_capture(minimal([CookieRecord("a", "1", "x.example")]))
    with pytest.raises(SnapshotParseError) as exc:
        deserialize_capture(data[: len(data) // 2])
    assert exc.value.offset >= 0


def test_non_object_and_bad_utf8_are_parse_errors():
    with pytest.raises(SnapshotParseError):
        deserialize_capture(b"[1, 2]")
    with pytest.raises(SnapshotParseError):
        deserialize_capture(b"\xff\xfe")


def test_unknown_schema_version_is_rejected():
    doc = json.loads(serialize_capture(minimal()))
    doc["schema_version"] = 999
    with pytest.raises(SchemaVersionError):
        deserialize_capture(json.dumps(doc).encode())


def test_screenshot_png_round_trip_and_store(tmp_path):
    shot = Screenshot(2, 1, bytes([255, 0, 0, 0, 0, 255]))
    assert Screenshot.from_png(shot.to_png()) == shot
    store = ScreenshotStore(tmp_path)
    digest = store.put(shot)
    assert digest == shot.sha256 and store.get(digest) == shot
    assert store.put(shot) == digest  # content addressed


def test_snapshot_files_round_trip(tmp_path):
    rec = minimal([CookieRecord("a", "1", "x.example", expiry=1_800_000_000)])
    path = save_snapshot(rec, tmp_path, "site")
    assert load_snapshot(path) == rec


@settings(max_examples=200)
@given(crawl_records())
def test_random_records_round_trip_structurally(record):
    store = ScreenshotStore()
    data = serialize_capture(record, store)
    back = deserialize_capture(data, store)
    assert back == record
    assert serialize_capture(back, store) == data
