import csv
import json

import pytest

from hadfam.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_scan_report(capsys):
    code, out = run(capsys, "scan", "--n", "12", "--max-order", "6", "--trials", "3", "--seed", "7")
    assert code == 0
    rep = json.loads(out.out)
    assert rep["first_break"] == 4
    assert rep["config"]["tol"] == 1e-6 and rep["config"]["seed"] == 7
    for key in ("n", "pattern", "max_order", "trials", "seed", "per_order_max_residual", "per_trial"):
        assert key in rep


def test_scan_reports_are_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["scan", "--n", "10", "--max-order", "4", "--seed", "3", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_defect_csv(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, _ = run(capsys, "defect", "--range", "2..30", "--csv", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 29
    six = next(r for r in rows if r["N"] == "6")
    assert six["d1"] == "4" and six["d_conj"] == ""
    assert next(r for r in rows if r["N"] == "12")["d_conj"] == "13"


def test_toy_prints_fraction(capsys):
    code, out = run(capsys, "toy", "--branch", "origin", "--format", "text")
    assert code == 0
    assert "31/12" in out.out


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys, "scan", "--n", "12")[0] == 64  # seed is mandatory
    assert run(capsys, "defect", "--bogus")[0] == 64


def test_domain_errors(capsys):
    assert run(capsys, "scan", "--n", "30", "--pattern", "typeI", "--seed", "1")[0] == 1
    assert run(capsys, "defect")[0] == 1
    assert run(capsys, "scan", "--n", "6", "--seed", "1", "--precision", "quad")[0] == 1


def test_custom_pattern(capsys, tmp_path):
    p = tmp_path / "pat.json"
    p.write_text(json.dumps([{"diag": 4, "classes": [[0, 2], [1, 3]]}, {"diag": 8, "classes": [[0, 2], [1, 3]]}]))
    code, out = run(capsys, "scan", "--n", "12", "--max-order", "4", "--seed", "1", "--pattern", f"custom:{p}")
    assert code == 0
    assert json.loads(out.out)["first_break"] is None


def test_families_and_export(capsys, tmp_path):
    path = tmp_path / "h.json"
    code, out = run(capsys, "families", "--kind", "self-cognate", "--seed", "1", "--samples", "3",
                    "--export", str(path))
    assert code == 0
    rep = json.loads(out.out)
    assert rep["dim"] == 9 and rep["all_hadamard"] and rep["transpose_closure_max"] < 1e-12
    assert json.loads(path.read_text())["n"] == 12


def test_n12_vars_and_selftest(capsys, tmp_path):
    p = tmp_path / "v.json"
    vals = dict(x2=1, x10=2, x4a=0, x4b=0, x8a=0, x8b=0, x6a=1, x6b=[0, 1], x6c=3,
                x3a=1, x3b=2, x9a=0.5, x9b=-1)
    p.write_text(json.dumps(vals))
    code, out = run(capsys, "n12", "--vars", str(p))
    assert code == 0
    assert json.loads(out.out)["classification"] == "I"
    code, out = run(capsys, "n12", "--selftest", "--samples", "16")
    assert code == 0 and json.loads(out.out)["disagreements"] == 0


def test_expand(capsys):
    code, out = run(capsys, "expand", "--n", "6", "--order", "3", "--seed", "2", "--unitary")
    assert code == 0
    assert json.loads(out.out)["unitarity_residual"] < 1e-5
