import math

import numpy as np
import pytest

import sosp


def test_components_and_progress():
    assert sosp.psi(0.5) == 0.0
    assert sosp.psi(0.75) == pytest.approx(math.exp(-3.0))
    assert sosp.phi(0.0) == pytest.approx(2.066366, abs=1e-6)
    assert sosp.lambda_fn(0.0, 2) == pytest.approx(-8.0)
    assert sosp.prog(np.array([0.3, 0.6, 0.0, 0.0]), 0.5) == 2
    assert sosp.progress_deadline(20, 0.01, 0.1) == pytest.approx((20 - math.log(10)) / 0.02)


def test_cubic_interior_solution():
    out = sosp.solve_cubic(np.array([1.0, 0.0]), np.eye(2), 2.0, 10.0)
    assert out["s"][0] == pytest.approx(-(math.sqrt(5) - 1) / 2)
    assert out["converged"]


def test_parameters():
    p = sosp.sgd_hvp_rvr_params(1.0, 1.0, 1.0, 1.0, 1.0, 0.01)
    assert p["T"] == 56710
    assert p["eta"] == pytest.approx(1 / (2 * math.sqrt(2.01)))


def test_oracle_ledger():
    cfg = {"instance": {"problem": "lambda_sum", "dim": 3, "sigma1": 0.0, "sigma2": 0.0}}
    o = sosp.make_oracle(cfg, 0.1, 7)
    x = np.array([0.1, -0.2, 0.3])
    np.testing.assert_array_equal(o.grad(x), o.exact_grad(x))
    o.hvp(x, np.ones(3))
    assert o.ledger()["total"] == 2
    with pytest.raises(ValueError):
        o.grad(np.zeros(2))


def test_config_roundtrip_and_errors():
    cfg = sosp.normalize_config({"eps_grid": [0.2, 0.1], "replications": 2})
    assert cfg["replications"] == 2
    assert sosp.normalize_config(cfg) == cfg
    with pytest.raises(sosp.ConfigError):
        sosp.normalize_config({"eps_grid": [0.1, 0.2]})


def test_sweep_is_reproducible():
    cfg = {
        "command": "sweep",
        "instance": {"problem": "scaled_ramp", "dim": 2},
        "solver": {"algorithms": ["sgd", "sgd_hvp_rvr"]},
        "eps_grid": [0.2, 0.1],
        "replications": 2,
    }
    rows_a, summary = sosp.sweep(cfg)
    rows_b, _ = sosp.sweep(cfg)
    assert rows_a == rows_b
    assert set(summary["fits"]) == {"sgd", "sgd_hvp_rvr"}
    assert rows_a.splitlines()[0].startswith("command,algorithm,eps,gamma,seed,rep")


def test_solve_and_lowerbound():
    manifest, trajectory = sosp.solve({"instance": {"dim": 3}, "eps_grid": [0.3], "seed": 4})
    assert manifest["seed"] == 4
    assert manifest["runs"][0]["algorithm"] == "sgd_hvp_rvr"
    assert trajectory.startswith("algorithm,t,value,grad_norm")
    runs, traj, summary = sosp.lowerbound({"lowerbound": {"T": 10, "rho": 1.0}, "replications": 3})
    assert summary["median_full_progress"] == 10
    assert traj.startswith("run_id,t,prog")


def test_verify_core():
    report = sosp.verify(["core"])
    assert report["passed"]
