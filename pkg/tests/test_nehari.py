import json
import math

import numpy as np
import pytest

from maxwell_nehari.basis import enumerate_modes
from maxwell_nehari.energy import EnergyContext
from maxwell_nehari.errors import RegimeError
from maxwell_nehari.nehari import (
    DiagonalMetric,
    SolverConfig,
    ground_state,
    inner_maximize,
    nehari_residual,
    oracle_dense,
    sphere_descent,
)

PI = math.pi


@pytest.fixture(scope="module")
def ctx_neg(basis35, aniso_cubic):
    # lambda = -2.5 puts the three lambda_k = 2 modes into the tilde space
    return EnergyContext(basis35, -2.5, aniso_cubic)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol_outer=0)
    with pytest.raises(ValueError):
        SolverConfig(shrink=1.5)
    with pytest.raises(ValueError):
        SolverConfig(restarts=0)


def test_inner_maximizer_lies_on_manifold(ctx_neg):
    rng = np.random.default_rng(0)
    for _ in range(5):
        u = rng.normal(size=ctx_neg.plus_idx.size)
        pt = inner_maximize(u, ctx_neg)
        res = nehari_residual(pt.state(ctx_neg), ctx_neg)
        assert res["self_pairing_rel"] < 1e-9
        assert res["tilde_residual_rel"] < 1e-9
        assert pt.t > 0


def test_inner_maximizer_independent_of_scale_and_warm_start(ctx_neg):
    u = np.random.default_rng(1).normal(size=ctx_neg.plus_idx.size)
    a = inner_maximize(u, ctx_neg)
    b = inner_maximize(5 * u, ctx_neg, warm=(0.3 * a.t, np.ones(ctx_neg.tilde_idx.size)))
    assert np.allclose(a.flat(ctx_neg), b.flat(ctx_neg), atol=1e-9)
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_inner_maximum_dominates_ray(ctx_neg):
    u = np.random.default_rng(2).normal(size=ctx_neg.plus_idx.size)
    pt = inner_maximize(u, ctx_neg)
    rng = np.random.default_rng(3)
    for _ in range(50):
        z = np.zeros(ctx_neg.size)
        z[ctx_neg.plus_idx] = rng.uniform(0, 2) * pt.t * pt.direction
        z[ctx_neg.tilde_idx] = pt.tilde + rng.normal(scale=0.3, size=ctx_neg.tilde_idx.size)
        assert ctx_neg.value(z) <= pt.value + 1e-12


def test_inner_rejects_bad_direction(ctx_neg):
    with pytest.raises(ValueError):
        inner_maximize(np.zeros(ctx_neg.plus_idx.size), ctx_neg)
    with pytest.raises(ValueError):
        inner_maximize(np.ones(ctx_neg.plus_idx.size + 1), ctx_neg)


def test_sphere_descent_finds_smallest_eigenvalue():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    A = Q @ np.diag([0.5, 1, 2, 3, 4, 5]) @ Q.T

    def evaluate(u):
        return float(u @ A @ u), 2 * A @ u, None

    res = sphere_descent(evaluate, rng.normal(size=6), DiagonalMetric(np.ones(6)), SolverConfig(tol_outer=1e-10))
    assert res.converged
    assert res.value == pytest.approx(0.5, rel=1e-12)


def test_single_mode_ground_state(cube, quartic):
    b = enumerate_modes(cube, 2.5, normalized=False)
    b = b.subset([b.find((1, 1, 0))], [])
    rep = ground_state(EnergyContext(b, 0.0, quartic))
    assert rep.c0 == pytest.approx(4 * PI**3 / 9, rel=1e-12)
    assert rep.state.v[0] == pytest.approx(math.sqrt(32 / 9), rel=1e-10)


def test_ground_state_report_roundtrips_json(ctx_neg):
    rep = ground_state(ctx_neg, SolverConfig(restarts=2))
    d = json.loads(json.dumps(rep.to_dict()))
    assert float.fromhex(d["c0_hex"]) == rep.c0
    assert rep.norms["v_V"] > 1e-3


def test_threads_do_not_change_result(ctx_neg):
    a = ground_state(ctx_neg, SolverConfig(restarts=2, threads=1))
    b = ground_state(ctx_neg, SolverConfig(restarts=2, threads=2))
    assert a.c0 == b.c0
    assert np.array_equal(a.state.flat, b.state.flat)


def test_oracle_refuses_large_problems(basis65, quartic):
    with pytest.raises(RegimeError):
        oracle_dense(EnergyContext(basis65, 0.0, quartic))


def test_oracle_single_direction_problem(cube, quartic):
    b = enumerate_modes(cube, 2.5)
    b = b.subset([b.find((1, 1, 0))], [])
    out = oracle_dense(EnergyContext(b, 0.0, quartic))
    assert out["c0_oracle"] == pytest.approx(4 * PI**3 / 9, rel=1e-10)
