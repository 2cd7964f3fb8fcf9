"""Acceptance criteria 1-11, one test each; every test records a PASS/FAIL line for the summary."""

import filecmp
import json
import math
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from conftest import CUBE, record
from maxwell_nehari.axisym import (
    CylinderDomain,
    MeridianGrid,
    ReducedProblem,
    lifted_energy,
    lifted_trace_residual,
    lifted_weak_divergence,
    solve_sectors,
    solve_symmetric,
)
from maxwell_nehari.basis import (
    BoxDomain,
    StateVector,
    boundary_trace_residual,
    enumerate_modes,
    gauss_grid,
)
from maxwell_nehari.cli import main
from maxwell_nehari.energy import EnergyContext, J_grad
from maxwell_nehari.fd_oracle import yee_curlcurl_eigenvalues
from maxwell_nehari.nehari import ground_state, nehari_residual, oracle_dense
from maxwell_nehari.nonlinearity import (
    BlackBoxNonlinearity,
    NonlinearitySpec,
    RadialFamily,
    StepField,
    check_conditions,
    kerr_from_physics,
    witness_margin,
)

PI = math.pi
CONFIGS = Path(__file__).resolve().parents[1] / "configs"
LAMBDAS = (0.0, -1.0, -2.5)
MODELS = {
    "quartic": NonlinearitySpec.power(4),
    "aniso_cubic": NonlinearitySpec.power(3, M=np.diag([2.0, 1.0, 1.0])),
}
CYL = CylinderDomain(PI, PI)
LEVELS = (8, 16, 32)

pytestmark = pytest.mark.slow


def _orders(values, hs=None):
    values = np.asarray(values, float)
    if hs is None:
        return np.log2(values[:-1] / values[1:])
    hs = np.asarray(hs, float)
    return np.log(values[:-1] / values[1:]) / np.log(hs[:-1] / hs[1:])


@pytest.fixture(scope="module")
def ground65():
    """Ground states at cutoff 6.5 for every (lambda, model) pair."""
    basis = enumerate_modes(CUBE, 6.5)
    out = {}
    for lam in LAMBDAS:
        for name, nl in MODELS.items():
            ctx = EnergyContext(basis, lam, nl)
            out[lam, name] = (ctx, ground_state(ctx))
    return out


@pytest.fixture(scope="module")
def axisym_levels():
    nl = NonlinearitySpec.power(4)
    return {n: solve_sectors(MeridianGrid(CYL, n, n), 0.0, nl)["all"] for n in LEVELS}


# -- 1 ---------------------------------------------------------------------------


def test_criterion_01_cavity_spectrum():
    basis = enumerate_modes(CUBE, 6.5)
    exact = Counter({2: 3, 3: 2, 5: 6, 6: 6})
    got = Counter(int(round(e)) for e in basis.divfree_eigs)
    integral = got == exact and np.allclose(basis.divfree_eigs, np.round(basis.divfree_eigs), atol=1e-12)
    t0 = time.perf_counter()
    fd = yee_curlcurl_eigenvalues((PI, PI, PI), 16, 6.5 * 1.05, nev=40)
    elapsed = time.perf_counter() - t0
    ref = np.sort(basis.divfree_eigs)
    fd = np.sort(fd)[: ref.size]
    rel = float(np.max(np.abs(fd - ref) / ref)) if fd.size == ref.size else math.inf
    ok = integral and rel <= 0.02 and elapsed <= 60
    record(1, ok, f"multiset {dict(sorted(got.items()))}; Yee 16^3 max rel err {rel:.3e} in {elapsed:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------


def test_criterion_02_single_mode_closed_form():
    b = enumerate_modes(CUBE, 2.5, normalized=False)
    b = b.subset([b.find((1, 1, 0))], [])
    rep = ground_state(EnergyContext(b, 0.0, NonlinearitySpec.power(4)))
    t_star, c_exact = math.sqrt(32 / 9), 4 * PI**3 / 9
    err_t = abs(rep.state.v[0] - t_star) / t_star
    err_c = abs(rep.c0 - c_exact) / c_exact

    # tensor Gauss-Legendre on (0, pi)^3, independent of the package
    x, w = leggauss(40)
    x, w = PI / 2 * (x + 1), PI / 2 * w
    s, c = np.sin(x), np.cos(x)
    I_curl = 2 * (w @ s**2) * (w @ c**2) * w.sum()  # |curl E|^2 = sin^2 x1 cos^2 x2 + cos^2 x1 sin^2 x2
    I_2 = (w @ s**2) ** 2 * w.sum()
    I_4 = (w @ s**4) ** 2 * w.sum()
    quad = [abs(I_curl - PI**3 / 2), abs(I_2 - PI**3 / 4), abs(I_4 - 9 * PI**3 / 64)]
    ok = err_t <= 1e-8 and err_c <= 1e-8 and max(quad) <= 1e-12
    record(2, ok, f"t* rel err {err_t:.2e}, c0 rel err {err_c:.2e}, integral errs {max(quad):.1e}")
    assert ok


# -- 3 ---------------------------------------------------------------------------


def test_criterion_03_oracle_equivalence():
    basis = enumerate_modes(CUBE, 3.5)
    rows = []
    for lam in LAMBDAS:
        for name, nl in MODELS.items():
            ctx = EnergyContext(basis, lam, nl)
            assert ctx.size <= 12
            c0 = ground_state(ctx).c0
            orc = oracle_dense(ctx)
            rows.append((lam, name, abs(c0 - orc["c0_oracle"]) / c0, orc["cluster_spread"]))
    worst_rel = max(r[2] for r in rows)
    worst_spread = max(r[3] for r in rows)
    ok = len(rows) >= 3 and worst_rel <= 1e-6 and worst_spread <= 1e-7
    record(3, ok, f"{len(rows)} problems (dim {basis.size}); max rel diff {worst_rel:.2e}, max spread {worst_spread:.2e}")
    assert ok, rows


# -- 4 ---------------------------------------------------------------------------


def test_criterion_04_residuals(ground65):
    worst = {"nehari": 0.0, "el": 0.0, "v": math.inf}
    for ctx, rep in ground65.values():
        res = nehari_residual(rep.state, ctx)
        worst["nehari"] = max(worst["nehari"], res["self_pairing_rel"], res["tilde_residual_rel"])
        worst["el"] = max(worst["el"], rep.el_residual)
        worst["v"] = min(worst["v"], rep.norms["v_V"])
    ok = worst["nehari"] <= 1e-8 and worst["el"] <= 1e-6 and worst["v"] >= 1e-3
    record(4, ok, f"{len(ground65)} ground states; nehari {worst['nehari']:.2e}, EL {worst['el']:.2e}, "
                  f"min |v|_V {worst['v']:.3f}")
    assert ok


# -- 5 ---------------------------------------------------------------------------


def _fd_rel(value, g, z, d):
    h = 1e-5 * max(1.0, np.linalg.norm(z)) / np.linalg.norm(d)
    fd = (value(z + h * d) - value(z - h * d)) / (2 * h)
    return abs(fd - g @ d) / abs(g @ d)


def test_criterion_05_gradient_checks():
    rng = np.random.default_rng(2024)
    basis = enumerate_modes(CUBE, 6.5)
    step_model = NonlinearitySpec.power(3.5, StepField(0, PI / 2, 1.0, 2.0), np.diag([1.0, 2.0, 1.0]))
    models = [*MODELS.values(), step_model]
    ctxs = [EnergyContext(basis, lam, nl) for lam in LAMBDAS for nl in models]
    errs3 = []
    for i in range(54):
        ctx = ctxs[i % len(ctxs)]
        z, d = rng.normal(size=basis.size), rng.normal(size=basis.size)
        g = J_grad(StateVector.from_flat(z, basis), ctx).flat
        errs3.append(_fd_rel(ctx.value, g, z, d))

    errs2 = []
    radial = [NonlinearitySpec.power(4), NonlinearitySpec.power(3.5, StepField(2, 1.0, 1.0, 2.0))]
    problems = [ReducedProblem(MeridianGrid(CylinderDomain(1.5, 2.0), 7, 9), lam, nl)
                for lam in (0.0, -0.5) for nl in radial]
    for i in range(52):
        prob = problems[i % len(problems)]
        a, d = rng.normal(size=prob.grid.size), rng.normal(size=prob.grid.size)
        errs2.append(_fd_rel(prob.value, prob.value_and_grad(a)[1], a, d))
    ok = max(errs3) <= 1e-6 and max(errs2) <= 1e-6 and len(errs3) >= 50 and len(errs2) >= 50
    record(5, ok, f"J_grad {len(errs3)} checks max rel {max(errs3):.2e}; "
                  f"reduced_gradient {len(errs2)} checks max rel {max(errs2):.2e}")
    assert ok


# -- 6 ---------------------------------------------------------------------------


def test_criterion_06_scaling_law():
    basis = enumerate_modes(CUBE, 5.5)
    worst3 = 0.0
    for lam, nl in [(-1.0, MODELS["quartic"]), (0.0, MODELS["aniso_cubic"])]:
        ctx = EnergyContext(basis, lam, nl)
        c = ground_state(ctx).c0
        for s in (0.5, 2.0):
            cs = ground_state(ctx.with_nonlinearity(nl.scaled(s))).c0
            worst3 = max(worst3, abs(cs / c - s ** (-2 / (nl.p_max - 2))) / s ** (-2 / (nl.p_max - 2)))

    grid = MeridianGrid(CYL, 12, 12)
    worst2 = 0.0
    for lam, nl in [(0.0, MODELS["quartic"]), (-0.5, NonlinearitySpec.power(3))]:
        c = solve_symmetric(grid, lam, nl).c
        for s in (0.5, 2.0):
            cs = solve_symmetric(grid, lam, nl.scaled(s)).c
            worst2 = max(worst2, abs(cs / c - s ** (-2 / (nl.p_max - 2))) / s ** (-2 / (nl.p_max - 2)))
    ok = worst3 <= 1e-6 and worst2 <= 1e-6
    record(6, ok, f"max rel deviation 3D {worst3:.2e}, axisym {worst2:.2e}")
    assert ok


# -- 7 ---------------------------------------------------------------------------


def test_criterion_07_axisym_vs_3d(axisym_levels):
    nl = NonlinearitySpec.power(4)
    gaps, rels = [], []
    for n in LEVELS:
        rep = axisym_levels[n]
        J3 = lifted_energy(rep.alpha, 0.0, nl)
        gaps.append(abs(rep.c - J3))
        rels.append(gaps[-1] / abs(J3))
    orders = _orders(gaps)
    ok = min(orders) >= 1.8 and rels[-1] <= 0.01
    record(7, ok, f"gaps {', '.join(f'{g:.3e}' for g in gaps)}; orders {', '.join(f'{o:.2f}' for o in orders)}; "
                  f"finest rel {rels[-1]:.2e}")
    assert ok


# -- 8 ---------------------------------------------------------------------------


def _potential(k):
    """phi = prod sin(k_j x_j) on the cube and its gradient."""
    k = np.asarray(k, float)

    def pot(pts):
        s, c = np.sin(k * pts), np.cos(k * pts)
        phi = s.prod(-1)
        grad = np.stack([k[j] * c[:, j] * np.prod(np.delete(s, j, axis=1), axis=1) for j in range(3)], -1)
        return phi, grad

    return pot


def test_criterion_08_boundary_and_divergence(axisym_levels):
    box = BoxDomain((PI, 2.0, 1.3))
    basis = enumerate_modes(box, 12.0)
    trace_modes = max(boundary_trace_residual(StateVector.from_flat(e, basis), basis) for e in np.eye(basis.size))
    rng = np.random.default_rng(8)
    trace_combo = 0.0
    for _ in range(20):
        z = rng.normal(size=basis.size)
        trace_combo = max(trace_combo, boundary_trace_residual(StateVector.from_flat(z, basis), basis)
                          / np.abs(z).sum())

    # weak divergence of the V-block: int v . grad(phi) for sine potentials phi in H^1_0
    cube = enumerate_modes(CUBE, 6.5)
    grid = gauss_grid(CUBE, 24)
    pts = grid.points()
    wts = grid.weight_tensor().ravel()
    Vfields = cube.evaluate(pts, rows=np.arange(cube.n_divfree))
    div3 = 0.0
    for k in np.ndindex(4, 4, 4):
        if min(k) == 0:
            continue
        _, gphi = _potential(k)(pts)
        pair = np.einsum("apc,pc,p->a", Vfields, gphi, wts)
        div3 = max(div3, float(np.max(np.abs(pair))) / math.sqrt(wts @ np.sum(gphi**2, -1)))

    def cyl_pot(pts):
        x, y, z = pts.T
        b = PI**2 - x**2 - y**2
        q = 1 + x + 2 * y**2 + x * y
        grad = np.column_stack([(-2 * x * q + b * (1 + y)) * np.sin(z),
                                (-2 * y * q + b * (4 * y + x)) * np.sin(z), b * q * np.cos(z)])
        return b * np.sin(z) * q, grad

    div_axi = lifted_weak_divergence(axisym_levels[LEVELS[-1]].alpha, [cyl_pot])
    hs, tr = zip(*(lifted_trace_residual(axisym_levels[n].alpha, 2 * n) for n in LEVELS))
    slopes = _orders(tr, hs)
    ok = (max(trace_modes, trace_combo) <= 1e-12 and div3 <= 1e-12
          and all(0.8 <= s <= 1.25 for s in slopes) and div_axi <= 1e-12)
    record(8, ok, f"trace {max(trace_modes, trace_combo):.1e}, weak div {div3:.1e} (lift {div_axi:.1e}); "
                  f"axisym trace {', '.join(f'{t:.3f}' for t in tr)} slopes {', '.join(f'{s:.2f}' for s in slopes)}")
    assert ok


# -- 9 ---------------------------------------------------------------------------


def test_criterion_09_condition_checker():
    families = [
        NonlinearitySpec.power(4),
        NonlinearitySpec.power(3, StepField(0, 1.0, 0.5, 2.0), np.array([[1, 0.3, 0], [0, 1, 0], [0, 0, 2.0]])),
        kerr_from_physics(1.0, 1.0, 1.0, 1.0)[0],
    ]
    certified = all(check_conditions(f).certified_family and not check_conditions(f).violated for f in families)
    radial = RadialFamily(lambda x, t: t**2 / 4 + t**1.5 / 3, lambda x, t: t / 2 + 0.5 * np.sqrt(t), p=4)
    rrep = check_conditions(radial, seed=0)
    radial_ok = not rrep.violated and all(rrep.status(c) == "certified" for c in ("F1", "F5", "F7"))

    margins = {}
    for expr, p in (("s**2/2", 3), ("s**4/4 - s**3", 4)):
        nl = BlackBoxNonlinearity.from_expression(expr, p=p)
        rep = check_conditions(nl)
        w = rep.conditions["F4"].witness if rep.status("F4") == "violated" else None
        margins[expr] = witness_margin(nl, "F4", w) if w is not None else -math.inf
    ok = certified and radial_ok and min(margins.values()) >= 1e-9
    record(9, ok, f"power/Kerr certified {certified}, radial {radial_ok}; witness margins "
                  + ", ".join(f"{k}: {v:.2e}" for k, v in margins.items()))
    assert ok


# -- 10 --------------------------------------------------------------------------


def test_criterion_10_monotonicity(ground65):
    rel = 1e-9  # solver tolerance on c0
    chains = []
    for lam in LAMBDAS:
        for name, nl in MODELS.items():
            cs = [ground_state(EnergyContext(enumerate_modes(CUBE, K), lam, nl)).c0 for K in (3.5, 5.5)]
            cs.append(ground65[lam, name][1].c0)
            chains.append(all(b <= a * (1 + rel) for a, b in zip(cs, cs[1:])))

    basis = enumerate_modes(CUBE, 5.5)
    low = NonlinearitySpec.power(4, StepField(0, PI / 2, 1.0, 1.5))
    high = NonlinearitySpec.power(4, StepField(0, PI / 2, 1.5, 2.0))
    pairs = []
    for lam in (0.0, -1.0):
        c_low = ground_state(EnergyContext(basis, lam, low)).c0
        c_high = ground_state(EnergyContext(basis, lam, high)).c0
        pairs.append((c_low, c_high))
    gamma_ok = all(h <= l * (1 + rel) for l, h in pairs)
    ok = all(chains) and gamma_ok
    record(10, ok, f"cutoff chains nonincreasing {sum(chains)}/{len(chains)}; step-field pairs "
                   + ", ".join(f"{l:.4f} >= {h:.4f}" for l, h in pairs))
    assert ok


# -- 11 --------------------------------------------------------------------------


def test_criterion_11_determinism(tmp_path):
    compared, mismatched = 0, []
    for cfg in sorted(CONFIGS.glob("*.ini")):
        command = next(l.split("=")[1].strip() for l in cfg.read_text().splitlines() if l.startswith("command"))
        dirs = [tmp_path / f"{cfg.stem}_{i}" for i in (0, 1)]
        for d in dirs:
            assert main([command, "--config", str(cfg), "--out-dir", str(d), "--seed", "7"]) == 0
        for f in sorted(dirs[0].iterdir()):
            if f.name == "manifest.json":
                continue  # wall-clock timings live here by design
            compared += 1
            if not filecmp.cmp(f, dirs[1] / f.name, shallow=False):
                mismatched.append(f"{cfg.stem}/{f.name}")
        m0, m1 = (json.loads((d / "manifest.json").read_text()) for d in dirs)
        for m in (m0, m1):
            m.pop("timings"), m.pop("started")
        if m0 != m1:
            mismatched.append(f"{cfg.stem}/manifest.json")
    ok = not mismatched and compared > 0
    record(11, ok, f"{compared} report files byte-identical across reruns" if ok else f"mismatch: {mismatched}")
    assert ok
