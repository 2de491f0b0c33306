import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from cdepbounds.cli import run_cli
from cdepbounds.data import write_dataset


def run_json(capsys, argv):
    code = run_cli(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_bounds_at_zero(capsys):
    code, rep, _ = run_json(capsys, ["bounds", "--c", "0", "--param", "ate", "--dgp", "baseline"])
    assert code == 0
    (r,) = rep["results"]
    assert r["lower"] == pytest.approx(1.0, abs=1e-3) and r["upper"] == pytest.approx(1.0, abs=1e-3)
    assert rep["format"] == "cdepbounds-report/1"


def test_bounds_several_params(capsys, tmp_path):
    table = tmp_path / "b.csv"
    code, rep, _ = run_json(capsys, ["bounds", "--c", "0.1", "--param", "ate", "--param", "qte",
                                     "--tau", "0.5", "--param", "cate", "--cell", "w=1",
                                     "--dgp", "baseline", "--table", str(table)])
    assert code == 0
    assert [r["param"] for r in rep["results"]] == ["ate", "qte", "cate"]
    assert len(list(csv.reader(table.open()))) == 4


def test_curve_has_101_nested_rows(capsys, tmp_path):
    table = tmp_path / "curve.csv"
    code, rep, _ = run_json(capsys, ["curve", "--param", "ate", "--grid", "0:1:0.01",
                                     "--dgp", "baseline", "--table", str(table)])
    assert code == 0
    rows = rep["results"]["rows"]
    assert len(rows) == 101 and rep["results"]["nested"]
    lo = np.array([r["lower"] for r in rows])
    hi = np.array([r["upper"] for r in rows])
    assert np.all(np.diff(lo) <= 1e-12) and np.all(np.diff(hi) >= -1e-12)
    assert len(list(csv.reader(table.open()))) == 102


def test_breakdown_report(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run_json(capsys, ["breakdown", "--dgp", "baseline", "--param", "ate", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["results"]["breakdown"] == pytest.approx(0.26, abs=0.01)


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"source": {"dgp": {"p_given_w1": 0.9, "p_given_w0": 0.1}},
                               "param": "ate", "tol": 1e-3}))
    code, rep, _ = run_json(capsys, ["breakdown", "--config", str(cfg)])
    assert code == 0
    assert rep["results"]["breakdown"] == pytest.approx(0.085, abs=0.01)


def test_population_reuse(capsys, tmp_path):
    out = tmp_path / "r.json"
    run_cli(["bounds", "--c", "0.2", "--param", "ate", "--dgp", "p05", "--out", str(out)])
    capsys.readouterr()
    first = json.loads(out.read_text())["results"][0]
    code, rep, _ = run_json(capsys, ["bounds", "--c", "0.2", "--param", "ate", "--population", str(out)])
    assert code == 0
    assert rep["results"][0]["lower"] == pytest.approx(first["lower"], abs=1e-12)


def _two_covariate_data(path):
    rng = np.random.default_rng(5)
    n = 4000
    w1 = rng.integers(0, 2, n)
    w2 = rng.integers(0, 2, n)
    p = 0.3 + 0.2 * w1 + 0.1 * w2
    x = (rng.random(n) < p).astype(int)
    y = rng.normal(size=n) + x
    write_dataset(path, y, x, [(str(a), str(b)) for a, b in zip(w1, w2)], ("w1", "w2"))


def test_calibrate_from_data(capsys, tmp_path):
    data = tmp_path / "d.csv"
    _two_covariate_data(data)
    code, rep, _ = run_json(capsys, ["calibrate", "--data", str(data), "--covariates", "w1,w2",
                                     "--probs", "0.5,1"])
    assert code == 0
    rows = {r["covariate"]: r for r in rep["results"]}
    assert rows["w1"]["cbar"] > rows["w2"]["cbar"]
    assert rows["w1"]["q100"] == rows["w1"]["cbar"]


def test_bounds_from_data(capsys, tmp_path):
    data = tmp_path / "d.csv"
    _two_covariate_data(data)
    code, rep, _ = run_json(capsys, ["bounds", "--data", str(data), "--covariates", "w1,w2",
                                     "--c", "0", "--param", "ate"])
    assert code == 0
    assert rep["results"][0]["lower"] == pytest.approx(1.0, abs=0.1)


def test_replicate_figure2(capsys, tmp_path):
    code = run_cli(["replicate-figure2", "--step", "0.05", "--out-dir", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["propensity"]["p05"] > summary["propensity"]["baseline"] > summary["propensity"]["p09"]
    for name in ("figure2_propensity.csv", "figure2_r2.csv", "figure2_report.json"):
        assert (tmp_path / name).is_file()
    rows = list(csv.DictReader((tmp_path / "figure2_r2.csv").open()))
    assert {r["dgp"] for r in rows} == {"r2_15", "baseline", "r2_60"}
    assert len(rows) == 3 * 21


def test_verify_small(capsys):
    code, rep, _ = run_json(capsys, ["verify", "--cases", "20", "--mean-cases", "4", "--bins", "300"])
    assert code == 0 and rep["results"]["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["bounds", "--dgp", "baseline", "--param", "ate"],
    ["bounds", "--c", "0.1", "--param", "ate"],
    ["bounds", "--c", "0.1", "--dgp", "nope", "--param", "ate"],
    ["curve", "--dgp", "baseline"],
    ["curve", "--dgp", "baseline", "--param", "qte"],
    ["curve", "--dgp", "baseline", "--param", "ate", "--grid", "0:1"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(capsys, argv):
    assert run_cli(argv) == 1
    assert capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["bounds", "--c", "1.5", "--param", "ate", "--dgp", "baseline"],
    ["curve", "--param", "ate", "--dgp", "baseline", "--grid", "0.5,0.1"],
    ["bounds", "--c", "0.1", "--param", "ate", "--data", "missing.csv"],
    ["bounds", "--c", "0.1", "--param", "ate", "--config", "missing.json"],
    ["breakdown", "--param", "ate", "--dgp", "baseline", "--sign", "negative"],
])
def test_data_errors_exit_2(capsys, argv):
    assert run_cli(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_overlap_error_exit_2(capsys, tmp_path):
    data = tmp_path / "d.csv"
    write_dataset(data, [0.1, 0.2, 0.3, 0.4], [1, 1, 1, 1])
    assert run_cli(["bounds", "--c", "0", "--param", "ate", "--data", str(data)]) == 2
    assert "overlap" in capsys.readouterr().err


def test_numerical_failure_exit_3(capsys, monkeypatch):
    import cdepbounds.cli as cli

    def broken(*a, **k):
        raise ArithmeticError("divergence")

    monkeypatch.setattr(cli, "effect_bounds", broken)
    assert run_cli(["bounds", "--c", "0.1", "--param", "ate", "--dgp", "baseline"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "cdepbounds.cli", "bounds", "--c", "0", "--param", "ate",
                          "--dgp", "baseline"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["results"][0]["lower"] == pytest.approx(1.0, abs=1e-3)
