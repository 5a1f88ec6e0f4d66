from __future__ import annotations

import json
import subprocess
import sys

import pytest

from consentlens.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main, read_url_list

from .conftest import CORPUS


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_missing_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE


def test_module_entry_point_prints_help():
    proc = subprocess.run([sys.executable, "-m", "consentlens.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "detect" in proc.stdout


def test_detect_directory_persists_and_reports(tmp_path, capsys, corpus_labels):
    db = tmp_path / "c.db"
    code, out, _ = run(["detect", str(CORPUS), "--store", str(db)], capsys)
    assert code == EXIT_OK
    lines = [json.loads(line) for line in out.splitlines()]
    assert len(lines) == len(corpus_labels)
    assert all(len(line["verdicts"]) == 19 for line in lines)

    code, out, _ = run(["report", str(db), "--table", "prevalence", "--region", "Corpus"], capsys)
    assert code == EXIT_OK and out.splitlines()[0] == "Pattern,Corpus,Denominator" and len(out.splitlines()) == 20

    csv_path = tmp_path / "cookies.csv"
    code, _, _ = run(["report", str(db), "--table", "cookies", "--csv", str(csv_path)], capsys)
    assert code == EXIT_OK and csv_path.read_text().startswith("Rank,Dataset")

    labels = tmp_path / "labels.json"
    # not-applicable outcomes count as not triggered for labelling
    sites = {v["site_url"]: {p: bool(o) for p, o in v["expected"].items()} for v in corpus_labels.values()}
    labels.write_text(json.dumps({"sites": sites}))
    code, out, _ = run(["report", str(db), "--table", "metrics", "--labels", str(labels)], capsys)
    assert code == EXIT_OK
    rows = out.splitlines()[1:]
    assert len(rows) == 19 and all(r.split(",")[1] == "1.0000" for r in rows)

    code, out, _ = run(["detect", str(db)], capsys)
    assert code == EXIT_OK and len(out.splitlines()) == len(corpus_labels)


def test_report_usage_errors(tmp_path, capsys):
    code, _, err = run(["report", str(tmp_path / "none.db"), "--table", "prevalence"], capsys)
    assert code == EXIT_USAGE and "no store" in err
    code, _, err = run(["report", str(tmp_path / "none.db"), "--table", "metrics"], capsys)
    assert code == EXIT_USAGE and "--labels" in err


def test_detect_bad_snapshot_is_partial(tmp_path, capsys):
    (tmp_path / "broken.json").write_text("{not json")
    code, out, _ = run(["detect", str(tmp_path)], capsys)
    assert code == EXIT_PARTIAL and "broken.json" in out
    code, _, _ = run(["detect", str(tmp_path / "missing")], capsys)
    assert code == EXIT_USAGE


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"coverage_threshold": 3}))
    code, _, _ = run(["detect", str(CORPUS), "--config", str(cfg)], capsys)
    assert code == EXIT_USAGE


def test_lexicon_validate(tmp_path, capsys):
    code, out, _ = run(["lexicon", "validate"], capsys)
    assert code == EXIT_OK and out.count("-> ok") == 4
    from importlib import resources

    data = resources.files("consentlens.data")
    for stem in ("dp11_definitions", "dp12_purposes", "dp13_pricing", "dp17_legal"):
        (tmp_path / f"{stem}.json").write_text(data.joinpath(f"{stem}.json").read_text(encoding="utf-8"))
    doc = json.loads((tmp_path / "dp13_pricing.json").read_text())
    dropped = doc["entries"].pop()
    (tmp_path / "dp13_pricing.json").write_text(json.dumps(doc))
    code, out, _ = run(["lexicon", "validate", "--dir", str(tmp_path)], capsys)
    assert code == EXIT_PARTIAL and "MISMATCH" in out and f"missing [{dropped['category']}] {dropped['phrase']}" in out


def test_capture_rejects_empty_url_list(tmp_path, capsys):
    urls = tmp_path / "urls.txt"
    urls.write_text("# nothing\n\n")
    code, _, err = run(["capture", str(urls), "--out", str(tmp_path / "x.db")], capsys)
    assert code == EXIT_USAGE and "empty" in err
    urls.write_text("example.com\nhttps://b.example/\n")
    assert read_url_list(str(urls)) == ["https://example.com", "https://b.example/"]
    with pytest.raises(SystemExit):
        main(["capture", str(urls), "--workers", "0"])
