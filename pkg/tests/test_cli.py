from __future__ import annotations

import json

import numpy as np
import pytest

from advassign.cli import main
from advassign.experiments import CSV_HEADER, parse_csv
from advassign.model import load_instance


@pytest.fixture
def het_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--n", "4", "--m", "5", "--tau", "1", "--util-dist", "uniform-01", "--seed", "3", "--out", str(path)]) == 0
    return path


def _run(args, capsys):
    assert main(args) == 0
    return json.loads(capsys.readouterr().out)


def test_gen_format(het_file):
    obj = json.loads(het_file.read_text())
    assert set(obj) == {"workers", "tasks", "tau", "budget"}
    assert set(obj["workers"][0]) == {"p", "c"} and set(obj["tasks"][0]) == {"u"}


def test_solve_attack_evaluate_chain(het_file, tmp_path, capsys):
    out = _run(["solve", str(het_file), "--mode", "heterogeneous"], capsys)
    a_path = tmp_path / "a.json"
    a_path.write_text(json.dumps(out))
    atk = _run(["attack", str(het_file), str(a_path)], capsys)
    assert atk["attack"] == out["attack"] and atk["utility"] == pytest.approx(out["utility"])
    ev = _run(["evaluate", str(het_file), str(a_path), "--attack", ",".join(map(str, out["attack"]))], capsys)
    assert ev["utility"] == pytest.approx(out["utility"])
    maj = _run(["evaluate", str(het_file), str(a_path), "--evaluator", "majority"], capsys)
    saa = _run(["evaluate", str(het_file), str(a_path), "--evaluator", "saa", "--saa-k", "3000"], capsys)
    assert abs(maj["utility"] - saa["utility"]) < 0.15


def test_output_uses_input_order(tmp_path, capsys):
    path = tmp_path / "unsorted.json"
    path.write_text(json.dumps({"workers": [{"p": 0.6}, {"p": 0.95}, {"p": 0.8}], "tasks": [{"u": 1}] * 4, "tau": 1}))
    out = _run(["solve", str(path), "--mode", "homogeneous"], capsys)
    s = np.array(out["assignment"])
    inst = load_instance(path)
    p_input = np.array([0.6, 0.95, 0.8])
    contrib = s.sum(axis=1) * p_input
    kept = np.delete(contrib, out["attack"]).sum()
    assert kept == pytest.approx(out["utility"])
    assert inst.n == 3


def test_multiworker_and_baselines(het_file, capsys):
    out = _run(["solve", str(het_file), "--mode", "heterogeneous", "--multiworker", "--saa-k", "300"], capsys)
    assert np.array(out["assignment"]).sum() == 5
    for method in ("split-k", "mc", "top-mc"):
        assert "utility" in _run(["baseline", str(het_file), "--method", method], capsys)
    assert _run(["baseline", str(het_file), "--method", "split-k", "--k", "2"], capsys)["utility"] >= 0


def test_errors_return_nonzero(tmp_path, het_file, capsys):
    assert main(["solve", str(tmp_path / "missing.json"), "--mode", "homogeneous"]) == 2
    assert main(["solve", str(het_file), "--mode", "homogeneous"]) == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["experiment", "loss", "--trials", "2", "--n-values", "3,5", "--m", "12"],
        ["experiment", "baselines", "--trials", "2", "--n", "5", "--m", "6", "--tau", "1,2"],
        ["experiment", "baselines", "--heterogeneous", "--trials", "1", "--n", "4", "--m", "5", "--tau", "1"],
        ["experiment", "multiworker", "--trials", "2", "--workers", "3", "--tasks", "3", "--tau", "1", "--saa-k", "200"],
    ],
)
def test_experiment_csv_is_deterministic(args, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--quiet", "--out", str(a)]) == 0
    assert main(args + ["--quiet", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert parse_csv(text)
