import json

import numpy as np
import pytest

from eplab.cli import main
from eplab.opfile import save_operator


@pytest.fixture
def opdir(tmp_path):
    save_operator(tmp_path / "I3.json", np.eye(3), "identity")
    save_operator(tmp_path / "N.json", [[0, 1], [0, 0]], "nilpotent")
    save_operator(tmp_path / "R.json", [[1, 1], [0, 0]])
    save_operator(tmp_path / "rect.json", np.ones((2, 3)))
    save_operator(tmp_path / "P1.json", np.diag([1, 0]))
    save_operator(tmp_path / "P2.json", np.diag([0, 1]))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_analyze_identity(opdir, capsys):
    code, rep = run_json(capsys, "analyze", opdir / "I3.json")
    assert code == 0 and rep["passed"]
    sec = rep["sections"]
    assert sec["operator"]["name"] == "identity"
    assert sec["pseudoinverse"]["rank"] == 3 and sec["ep"]["is_ep"]


def test_analyze_nilpotent_has_witness(opdir, capsys):
    code, rep = run_json(capsys, "analyze", opdir / "N.json")
    assert code == 0
    ep = rep["sections"]["ep"]
    assert not ep["is_ep"] and "Ran(T)" in ep["witness"]
    assert rep["sections"]["pseudoinverse"]["pinv"] == [["0", "0"], ["1", "0"]]


def test_analyze_pinv_entries(opdir, capsys):
    code, rep = run_json(capsys, "analyze", opdir / "R.json")
    assert code == 0
    assert rep["sections"]["pseudoinverse"]["pinv"] == [["0.5", "0"], ["0.5", "0"]]


def test_analyze_rectangular_skips_ep(opdir, capsys):
    code, rep = run_json(capsys, "analyze", opdir / "rect.json")
    assert code == 0 and rep["sections"]["pseudoinverse"]["rank"] == 1
    assert "does not apply" in rep["sections"]["ep"]["note"]


def test_text_report_and_stderr_timing(opdir, capsys):
    code, out, err = run(capsys, "analyze", opdir / "I3.json")
    assert code == 0
    assert out.splitlines()[-1] == "overall: PASS"
    assert "wall-time" in err and "wall-time" not in out


def test_product_commands(opdir, capsys):
    code, rep = run_json(capsys, "product", opdir / "P1.json", opdir / "P2.json")
    assert code == 0 and rep["passed"]
    code, _, err = run(capsys, "product", opdir / "P1.json", opdir / "N.json")
    assert code == 2 and "not EP" in err
    code, _, _ = run(capsys, "product", opdir / "P1.json", opdir / "rect.json")
    assert code == 2


def test_example34_command(capsys):
    code, rep = run_json(capsys, "example34", "--cutoff", "20")
    assert code == 0 and rep["passed"]
    for bad in ("9", "11", "abc"):
        assert run(capsys, "example34", "--cutoff", bad)[0] == 2


def test_input_errors(opdir, capsys):
    assert run(capsys, "analyze", opdir / "missing.json")[0] == 2
    (opdir / "bad.json").write_text("{")
    assert run(capsys, "analyze", opdir / "bad.json")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "analyze", opdir / "I3.json", "--rank-tol", "-1")[0] == 2


def test_suite_zero_trials(capsys):
    code, rep = run_json(capsys, "suite", "--trials", "0")
    assert code == 0 and rep["passed"]


def test_reports_are_deterministic(opdir, capsys):
    first = run(capsys, "suite", "--seed", "3", "--trials", "2", "--dim", "4")[1]
    second = run(capsys, "suite", "--seed", "3", "--trials", "2", "--dim", "4")[1]
    assert first == second
