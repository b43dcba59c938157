from __future__ import annotations

import json

from mabfws.cli import main

from conftest import DATA

FILE = str(DATA / "suite" / "workshop-01.json")


def test_plan_then_validate(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["plan", FILE, "--heuristic", "f5", "--k", "2", "--repeats", "1", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["solved"] and report["k"] == 2 and "wall_time" not in report
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps(report["plan"]))
    assert main(["validate", FILE, str(plan)]) == 0
    assert "valid" in capsys.readouterr().out
    plan.write_text(json.dumps(report["plan"][1:]))
    assert main(["validate", FILE, str(plan)]) == 1
    assert "invalid at step 0" in capsys.readouterr().out


def test_plan_stdout_with_timing(capsys):
    assert main(["plan", FILE, "--repeats", "1", "--timing", "--mode", "conc"]) == 0
    assert "wall_time" in json.loads(capsys.readouterr().out)


def test_width_profile_cli(capsys):
    assert main(["width-profile", str(DATA / "width" / "width2-pair.json")]) == 0
    assert "0.00\t100.00" in capsys.readouterr().out


def test_bench_cli(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"configs": [{"heuristic": "f1"}]}))
    out, summary = tmp_path / "cells.csv", tmp_path / "summary.csv"
    assert main(["bench", str(DATA / "width"), "--config", str(cfg), "--out", str(out),
                 "--summary", str(summary)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 5
    assert summary.read_text().startswith("heuristic,k,solved")


def test_config_error_exit_code(capsys):
    assert main(["plan", FILE, "--k", "3"]) == 2
    assert "k must be" in capsys.readouterr().err
    assert main(["validate", FILE, "/nonexistent/plan.json"]) == 2
