import json
import os
import subprocess
import sys

import pytest

from ifmsim.cli import EXIT_INVALID, EXIT_OK, main, run_cli
from ifmsim.report import render_jsonl, run_report, zeno_grid
from ifmsim.scenario import load_scenario


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def rows(text, section):
    return [r for r in records(text) if r.get("section") == section]


def test_run_ev_bomb_table(capsys):
    assert main(["run", "ev_bomb"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[distribution]" in out
    assert "explode:bomb  0.5" in out and "click:D1      0.25" in out


def test_run_records_and_files(tmp_path, capsys):
    assert main(["run", "ev_bomb", "--shots", "1000", "--seed", "5", "--out", str(tmp_path), "--jsonl"]) == 0
    out = capsys.readouterr().out
    meta = records(out)[0]
    assert meta["record"] == "meta" and meta["seed"] == 5 and meta["generator"] == "numpy.random.PCG64"
    dist = {r["event"]: r["probability"] for r in rows(out, "distribution")}
    assert dist == pytest.approx({"explode:bomb": 0.5, "click:D1": 0.25, "click:D2": 0.25})
    assert sum(r["count"] for r in rows(out, "sample")) == 1000
    names = set(os.listdir(tmp_path))
    assert {"report.txt", "records.jsonl", "distribution.csv", "sample.csv", "run_ev_bomb_distribution.png"} <= names
    assert (tmp_path / "records.jsonl").read_text() == out


def test_reproducible_records():
    spec = load_scenario("hardy")
    a = render_jsonl(run_report(spec, 5000, 11))
    b = render_jsonl(run_report(spec, 5000, 11))
    assert a == b


def test_sweep(capsys):
    assert main(["sweep", "--param", "T", "--from", "0.1", "--to", "0.9", "--steps", "9", "--jsonl"]) == 0
    frontier = rows(capsys.readouterr().out, "frontier")
    assert len(frontier) == 9
    assert frontier[-1]["T"] == pytest.approx(0.9)
    assert all(r["efficiency"] < 0.5 for r in frontier)


def test_zeno(capsys):
    assert main(["zeno", "--max-n", "100", "--jsonl"]) == 0
    table = rows(capsys.readouterr().out, "efficiency")
    last = table[-1]
    assert last["N"] == 100 and last["p_left_bomb"] == pytest.approx(0.9756, abs=1e-4)


def test_zeno_grid():
    assert zeno_grid(5) == [1, 2, 3, 4, 5]
    g = zeno_grid(1000)
    assert g[0] == 1 and g[-1] == 1000 and len(g) <= 61


def test_hardy(capsys, tmp_path):
    assert main(["hardy", "--jsonl", "--out", str(tmp_path)]) == 0
    cond = {r["query"]: r["probability"] for r in rows(capsys.readouterr().out, "conditionals")}
    assert cond == pytest.approx({"object_at_w": 1, "photon_at_w": 1, "both_at_w": 0}, abs=1e-9)


def test_repeat(capsys, tmp_path):
    assert main(["repeat", "--T", "0.5", "--max-rounds", "20", "--mode", "simulated", "--out", str(tmp_path), "--jsonl"]) == 0
    totals = rows(capsys.readouterr().out, "totals")[0]
    assert totals["found"] == pytest.approx(1 / 3, abs=1e-6)
    assert (tmp_path / "repeat_ev_repeated_rounds.png").exists()


def test_tsvf(capsys, tmp_path):
    assert main(["tsvf", "ev_bomb", "--postselect", "D2", "--jsonl", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    trace = {(r["cut"], r["mode"]): r["trace_free"] for r in rows(out, "trace") if r["carrier"] == "photon"}
    assert trace[(1, "int")] and trace[(2, "int")] and trace[(3, "int_m")]
    assert not trace[(1, "free")]
    weak = {(r["cut"], r["mode"]): r["re"] for r in rows(out, "weak_values")}
    assert weak[(2, "int")] == pytest.approx(0, abs=1e-9)
    assert (tmp_path / "tsvf_ev_bomb_trace.png").exists()


def test_tsvf_needs_postselection(capsys):
    assert main(["tsvf", "ev_empty"]) == EXIT_INVALID
    assert "BAD_PARAM" in capsys.readouterr().err


def test_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("name: x\ncircuit:\n  modes: [a]\n  stages: [[{kind: mirror, from: a, to: z}]]\n")
    assert main(["run", str(bad)]) == EXIT_INVALID
    assert "VALIDATION_ERROR" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("name: [oops\n")
    assert main(["run", str(bad)]) == EXIT_INVALID
    assert "PARSE_ERROR" in capsys.readouterr().err


def test_runtime_error_exit_code(capsys):
    assert main(["run", "/no/such/file.scenario"]) == 3
    assert "IO_ERROR" in capsys.readouterr().err


def test_usage_error_returns_2():
    assert run_cli(["launch"]) == 2
    assert run_cli(["run", "ev_bomb", "--shots", "0"]) == 2


def test_bad_transmittance_exit_code(capsys):
    assert main(["repeat", "--T", "1.5"]) == EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ifmsim", "run", "renninger_sectors"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert "0.333333" in proc.stdout
