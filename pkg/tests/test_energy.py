import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxwell_nehari.basis import BoxDomain, StateVector, enumerate_modes, gauss_grid
from maxwell_nehari.energy import EnergyContext, J_eval, J_grad, norms
from maxwell_nehari.errors import AliasingError, RegimeError, StructureError
from maxwell_nehari.nonlinearity import NonlinearitySpec, kerr_from_physics

PI = math.pi


def _single_mode(cube, normalized=False):
    b = enumerate_modes(cube, 2.5, normalized=normalized)
    return b.subset([b.find((1, 1, 0))], [])


def test_zero_state(basis65, quartic):
    ctx = EnergyContext(basis65, -1.0, quartic)
    e = J_eval(StateVector.zeros(basis65), ctx)
    assert e.total == 0 and e.I_value == 0


def test_single_mode_closed_form(cube, quartic):
    # E = t (0, 0, sin x1 sin x2):  J = (pi^3/2) t^2 / 2 - (9 pi^3 / 64) t^4 / 4
    ctx = EnergyContext(_single_mode(cube), 0.0, quartic)
    for t in (0.3, 1.0, 2.2):
        e = J_eval(StateVector(np.array([t]), np.zeros(0)), ctx)
        assert e.quad_curl == pytest.approx(PI**3 / 2 * t**2 / 2, rel=1e-13)
        assert e.potential == pytest.approx(9 * PI**3 / 64 * t**4 / 4, rel=1e-12)


def test_breakdown_identities(basis65, aniso_cubic):
    rng = np.random.default_rng(0)
    ctx = EnergyContext(basis65, -4.0, aniso_cubic)
    for _ in range(5):
        s = StateVector.from_flat(rng.normal(size=basis65.size), basis65)
        e = J_eval(s, ctx)
        assert e.total == pytest.approx(e.quad_curl + e.quad_lambda - e.potential, rel=1e-13)
        # I >= 0 for lambda <= 0
        assert e.I_value >= 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.0, -1.0, -2.5, -4.0]))
def test_gradient_matches_differences(seed, lam):
    b = enumerate_modes(BoxDomain((PI, PI, PI)), 6.5)
    ctx = EnergyContext(b, lam, NonlinearitySpec.power(3, M=np.diag([2.0, 1.0, 1.0])))
    rng = np.random.default_rng(seed)
    z = rng.normal(size=b.size)
    d = rng.normal(size=b.size)
    g = J_grad(StateVector.from_flat(z, b), ctx).flat
    h = 1e-5
    fd = (ctx.value(z + h * d) - ctx.value(z - h * d)) / (2 * h)
    assert abs(fd - g @ d) <= 1e-6 * max(1.0, abs(g @ d))


def test_hessian_matches_gradient_differences(basis35, quartic):
    ctx = EnergyContext(basis35, -1.0, quartic)
    rng = np.random.default_rng(4)
    z = rng.normal(size=basis35.size)
    H = ctx.hessian(z)
    h = 1e-6
    cols = [(ctx.value_and_grad(z + h * e)[1] - ctx.value_and_grad(z - h * e)[1]) / (2 * h)
            for e in np.eye(basis35.size)]
    assert np.allclose(np.array(cols).T, H, rtol=1e-6, atol=1e-6)
    assert np.allclose(H, H.T, atol=1e-12)


def test_norms(basis65, quartic):
    ctx = EnergyContext(basis65, 0.0, quartic)
    v = np.zeros(basis65.n_divfree)
    v[0] = 2.0
    n = norms(StateVector(v, np.zeros(basis65.n_gradient)), ctx)
    assert n["v_V"] == pytest.approx(2 * math.sqrt(2))
    assert n["grad_w_Lp"] == 0


def test_aliasing_refused(basis65, quartic, cube):
    with pytest.raises(AliasingError):
        EnergyContext(basis65, 0.0, quartic, grid=gauss_grid(cube, 8))


def test_degenerate_refused(basis65):
    spec, lam = kerr_from_physics(1.0, 1.0, 0.0)
    with pytest.raises(RegimeError):
        EnergyContext(basis65, lam, spec)


def test_state_shape_checked(basis65, basis35, quartic):
    ctx = EnergyContext(basis65, 0.0, quartic)
    with pytest.raises(StructureError):
        J_eval(StateVector.zeros(basis35), ctx)


def test_lambda_consistency(basis65, quartic):
    ctx = EnergyContext(basis65, -1.0, quartic)
    with pytest.raises(ValueError):
        EnergyContext(basis65, -2.0, quartic, split=ctx.split)
