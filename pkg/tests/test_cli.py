"""Command-line smoke tests."""

import csv
import json

import pytest

from tricolor.cli import build_parser, main, parse_rates


def test_parse_rates():
    assert parse_rates("0.1,0.2") == [0.1, 0.2]
    assert parse_rates("0.10:0.15:0.005") == pytest.approx([0.1 + 0.005 * k for k in range(11)])
    assert len(parse_rates("0.001:0.003:0.0005")) == 5


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["-h"])
    text = capsys.readouterr().out
    for cmd in ("simulate", "threshold", "verify-flags", "verify-distance", "dump-lattice",
                "dump-graph", "edge-weights"):
        assert cmd in text


def test_simulate_and_threshold(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"noise": "capacity", "distances": [3, 5], "ps": [0.05], "trials": 50, "seed": 1}))
    out = tmp_path / "res"
    assert main(["simulate", "--config", str(cfg), "--p", "0.05,0.2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "res.csv")))
    assert len(rows) == 4 and {r["p"] for r in rows} == {"0.05", "0.2"}
    man = json.loads((tmp_path / "res.manifest.json").read_text())
    assert man["config"]["ps"] == [0.05, 0.2]
    capsys.readouterr()
    assert main(["threshold", str(tmp_path / "res.csv")]) == 0
    res = json.loads(capsys.readouterr().out)
    assert "XZ" in res and res["XZ"]["status"] in ("ok", "no crossing in range")


def test_simulate_circuit_to_stdout_with_trace(tmp_path, capsys):
    trace = tmp_path / "trace.json"
    assert main(["simulate", "--noise", "circuit", "--distance", "3", "--p", "0.01", "--trials", "20",
                 "--flag-scheme", "renorm", "--trace", str(trace)]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0].startswith("noise,distance,p,basis")
    assert isinstance(json.loads(trace.read_text()), list)


def test_bad_input_returns_error(capsys):
    assert main(["simulate", "--distance", "4", "--p", "0.1", "--trials", "5"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["simulate", "--config", "/nonexistent/cfg.json"]) == 2


def test_verify_distance(capsys):
    assert main(["verify-distance", "--distance", "5", "--max-weight", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] and out["checked"] == {"1": 19, "2": 171}
    assert main(["verify-distance", "--distance", "7", "--samples", "50", "--weight", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "sampled"


def test_verify_flags(capsys):
    assert main(["verify-flags", "--distance", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["pass"]


def test_dumps(tmp_path, capsys):
    assert main(["dump-lattice", "--distance", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["distance"] == 3
    assert main(["dump-lattice", "--distance", "3", "--circuit", "text"]) == 0
    assert "CNOT" in capsys.readouterr().out
    out = tmp_path / "g.json"
    assert main(["dump-graph", "--distance", "3", "--pair", "GB", "--out", str(out)]) == 0
    g = json.loads(out.read_text())
    assert g["pair"] == "GB" and g["rounds"] == 4


def test_edge_weights(tmp_path, capsys):
    out, coeff = tmp_path / "t.csv", tmp_path / "c.csv"
    assert main(["edge-weights", "--distance", "5", "--out", str(out), "--coefficients", str(coeff)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert {r["model"] for r in rows} == {"flag-aware-all-gates", "flag-blind-cnot"}
    assert "8/15" in capsys.readouterr().err
    assert list(csv.DictReader(open(coeff)))
