import json
import math
import os
from pathlib import Path

import pytest

import entrance

CONFIGS = Path(os.environ.get("ENTRANCE_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "configs"


def test_validate_logistic_theta():
    report = entrance.validate(entrance.logistic_csbp(), grid=list(range(101)))
    assert report["integrability_ok"]
    assert report["one_sided_lipschitz_theta"] == pytest.approx(-0.5)


def test_classify_golden_cases():
    report = entrance.classify(entrance.logistic_csbp(c=1.0))
    assert report["verdict"] == "Entrance"
    assert report["integral_value"] == 2.0 / report["b_used"]
    linear = entrance.logistic_csbp()
    linear["gamma0"] = {"kind": "linear", "slope": -1}
    assert entrance.classify(linear)["verdict"] == "Inconclusive"


def test_passage_closed_form():
    sim = {"dt": 1e-4, "t_max": 3, "seed": 1}
    est = entrance.passage(entrance.logistic_drift_only(), 100.0, 2.0, sim, n_paths=2)
    assert est["mean"] == pytest.approx(0.98, abs=1e-3)
    assert est["censored_fraction"] == 0.0


def test_simulate_is_deterministic_across_workers():
    spec = entrance.logistic_csbp()
    sim = {"dt": 1e-2, "t_max": 1, "seed": 3, "observation_times": [1.0]}
    a = entrance.simulate(spec, 50.0, sim, n_paths=16, workers=1)
    b = entrance.simulate(spec, 50.0, sim, n_paths=16, workers=4)
    assert a == b
    assert all(v >= 0 for p in a["paths"] for v in p["values"])


def test_flow_keeps_order():
    res = entrance.flow(entrance.logistic_csbp(), [10, 20, 40], {"dt": 1e-2, "t_max": 1, "seed": 2},
                        n_realizations=5)
    assert all(r["order_violations"] == 0 for r in res["realizations"])


def test_diagnostics_round_trip():
    sim = {"dt": 1e-2, "t_max": 3, "seed": 4}
    spec = entrance.logistic_csbp()
    prof = entrance.entrance_profile(spec, [5, 10], [100, 1000], 3.0, sim, n_paths=100)
    assert len(prof["p_matrix"]) == 2
    sg = entrance.semigroup_cauchy(spec, 0.0, [1.0, 2.0], sim, n_paths=10)
    assert sg["values"][0] == pytest.approx(math.exp(-1.0))
    fdd = entrance.fdd_convergence(entrance.null_spec(), [0.5], [10, 100], 1000, sim, n_paths=20)
    assert fdd["per_time"][0]["non_decreasing"]


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        entrance.passage(entrance.logistic_drift_only(), 1.0, 2.0, {"seed": 1}, n_paths=1)
    with pytest.raises(ValueError):
        entrance.validate({"gamma0": {"kind": "nope"}})


def test_run_matches_cli(tmp_path):
    code, log = entrance.run("classify", CONFIGS / "logistic.json", out_dir=tmp_path)
    assert code == 0, log
    assert json.loads((tmp_path / "boundary.json").read_text())["verdict"] == "Entrance"
    code, _ = entrance.run("passage", CONFIGS / "logistic_drift_only.json", out_dir=tmp_path / "p",
                           passage__x0=1e5, passage__b=2)
    assert code == 0
    assert json.loads((tmp_path / "p" / "passage.json").read_text())["mean"] == pytest.approx(1.0, abs=1e-3)
