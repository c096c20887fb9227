import csv
import io
import json
import pathlib
import subprocess
import sys

import pytest

from fracwave.cli import load_preset, main

ROOT = pathlib.Path(__file__).resolve().parents[1]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_csv(capsys):
    code, out, _ = run(["simulate", "--h", "0.7", "--n", "10", "--seed", "1"], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 12
    assert lines[0] == "x,value" and float(lines[-1].split(",")[0]) == 1.0


def test_simulate_json_matches_csv(capsys):
    _, text_csv, _ = run(["simulate", "--h", "0.7", "--n", "20", "--seed", "3"], capsys)
    _, text_json, _ = run(["simulate", "--h", "0.7", "--n", "20", "--seed", "3", "--format", "json"], capsys)
    d = json.loads(text_json)
    assert d["schema"] == 1 and d["kind"] == "slice"
    rows = list(csv.reader(io.StringIO(text_csv)))[1:]
    assert [float(r[1]) for r in rows] == d["value"]


def test_json_output_is_byte_identical(capsys):
    argv = ["experiment", "--h", "0.7", "--n", "100", "--iters", "5", "--seed", "9",
            "--estimator", "hat", "--filter", "1,-2,1"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    d = json.loads(a)
    assert d["schema"] == 1
    assert list(d["runs"][0]["summary"]) == ["hat(1,-2,1)"]


def test_estimate_from_input_file(tmp_path, capsys):
    p = tmp_path / "slice.csv"
    _, text, _ = run(["simulate", "--h", "0.7", "--n", "500", "--seed", "2", "--out", str(p)], capsys)
    assert text == ""
    code, out, _ = run(["estimate", "--input", str(p), "--estimator", "hat", "--estimator", "tilde",
                        "--filter", "1,-2,1"], capsys)
    assert code == 0
    d = json.loads(out)
    assert [r["method"] for r in d["results"]] == ["hat", "tilde"]
    assert all(0.5 <= r["H_est"] <= 1 for r in d["results"])
    code, out, _ = run(["estimate", "--input", str(p), "--format", "csv"], capsys)
    assert out.startswith("method,filter,k,N,H_est")


def test_constants(capsys):
    code, out, _ = run(["constants", "--h", "0.6", "--filter", "1,-1", "--filter", "1,-2,1"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == 1
    assert d["sigma2_total"] == pytest.approx(2.164261641365487, rel=1e-12)
    code, out, _ = run(["constants", "--h", "0.85", "--format", "csv"], capsys)
    assert code == 0 and out.startswith("key,value")


def test_check_commands(capsys):
    code, out, _ = run(["clt-check", "--h", "0.6", "--n", "100", "--iters", "50"], capsys)
    assert code == 0 and "Wasserstein" in json.loads(out)["note"]
    code, out, _ = run(["noncentral-check", "--h", "0.9", "--n", "60", "--iters", "50"], capsys)
    assert code == 0 and json.loads(out)["kind"] == "noncentral-check"


def test_exit_code_invalid_input(capsys):
    assert run(["simulate", "--h", "0.7", "--bogus"], capsys)[0] == 1
    assert run(["simulate", "--h", "1.2"], capsys)[0] == 1
    assert run(["simulate", "--h", "0.7", "--filter", "1,1"], capsys)[0] == 1
    assert run(["estimate", "--h", "0.7", "--filter", "1,1"], capsys)[0] == 1
    assert run(["clt-check", "--h", "0.9", "--n", "50", "--iters", "5"], capsys)[0] == 1
    assert run(["experiment"], capsys)[0] == 1
    code, _, err = run([], capsys)
    assert code == 1 and "usage" in err


def test_exit_code_numerical_failure(tmp_path, capsys):
    p = tmp_path / "flat.csv"
    p.write_text("x,value\n" + "".join(f"{i / 10},0.0\n" for i in range(11)))
    code, _, err = run(["estimate", "--input", str(p)], capsys)
    assert code == 2 and "numerical" in err


def test_preset_copies_identical():
    shipped = ROOT / "src" / "fracwave" / "data" / "paper-table-1.json"
    config = ROOT / "configs" / "paper-table-1.json"
    assert json.loads(shipped.read_text()) == json.loads(config.read_text())
    p = load_preset("paper-table-1")
    assert p["N"] == 1000 and p["M"] == 100 and p["t"] == 3
    assert [float(h) for h in p["reference_means"]] == p["H_grid"]
    assert all(len(row) == len(p["cells"]) for row in p["reference_means"].values())
    assert all(len(row) == len(p["cells"]) for row in p["reference_mse"].values())


def test_preset_experiment(capsys):
    code, out, _ = run(["experiment", "--preset", "paper-table-1", "--h", "0.7", "--iters", "3", "--n", "200"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["preset"] == "paper-table-1"
    assert len(d["runs"][0]["summary"]) == 4


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "fracwave.cli", "simulate", "--h", "0.6", "--n", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and len(r.stdout.strip().split("\n")) == 6
