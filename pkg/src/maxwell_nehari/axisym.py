"""Azimuthal fields E = alpha(r, z) (-x2, x1, 0) on a solid cylinder.

With E of that form,  |E|^2 = r^2 alpha^2  and

    |curl E|^2 = r^2 (d_z alpha)^2 + (2 alpha + r d_r alpha)^2,

so the 3D energy reduces to a weighted 2D functional on the meridian
rectangle (0, R) x (0, H):

    J_Y = pi int [ r^2 a_z^2 + (2a + r a_r)^2 + lam r^2 a^2 ] r dr dz
          - 2 pi int F(x, r |a|) r dr dz.

The tangential trace of an azimuthal field vanishes on the lateral wall and
on both caps iff alpha does, so alpha is Dirichlet there; the axis needs no
condition.  Nodes in r are offset by half a cell so that none sits on the
axis while the wall r = R is a node:  dr = R / (Nr + 1/2),
r_i = (i + 1/2) dr.  Using 2a + r a_r = r^{-1} d_r (r^2 a), the radial term
is discretized as differences of beta = r^2 alpha between neighbouring
nodes, plus the exact contribution of the half cell next to the axis where
alpha is taken constant.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh, splu

from .energy import functional_3d
from .errors import ConvergenceError, RegimeError
from .nehari import SolverConfig, sphere_descent

log = logging.getLogger(__name__)

SECTORS = ("all", "even", "odd")


@dataclass(frozen=True)
class CylinderDomain:
    R: float
    H: float

    def __post_init__(self):
        if not (self.R > 0 and self.H > 0):
            raise ValueError("cylinder radius and height must be positive")


@dataclass(frozen=True)
class MeridianGrid:
    domain: CylinderDomain
    Nr: int
    Nz: int

    def __post_init__(self):
        if self.Nr < 2 or self.Nz < 2:
            raise ValueError("need at least two cells per direction")

    @property
    def dr(self):
        return self.domain.R / (self.Nr + 0.5)

    @property
    def dz(self):
        return self.domain.H / self.Nz

    @property
    def r(self):
        return (np.arange(self.Nr) + 0.5) * self.dr

    @property
    def z(self):
        """Interior z nodes (the caps are Dirichlet)."""
        return np.arange(1, self.Nz) * self.dz

    @property
    def shape(self):
        return (self.Nr, self.Nz - 1)

    @property
    def size(self):
        return self.Nr * (self.Nz - 1)

    @property
    def h(self):
        return max(self.dr, self.dz)

    def refined(self, factor=2):
        return MeridianGrid(self.domain, self.Nr * factor, self.Nz * factor)

    def mesh(self):
        return np.meshgrid(self.r, self.z, indexing="ij")


@dataclass
class AxisymState:
    alpha: np.ndarray
    grid: MeridianGrid

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(self.alpha)):
            raise ValueError("profile has non-finite entries")

    @property
    def flat(self):
        return self.alpha.ravel()


# -- discrete operators ----------------------------------------------------------


@dataclass(frozen=True)
class ReducedOperators:
    """Sparse pieces of the reduced quadratic form (without the factor pi)."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    r: np.ndarray  # radius per unknown
    cell: np.ndarray  # r dr dz per unknown
    points: np.ndarray  # (x1, x2, x3) = (r, 0, z) per unknown


def _diff_with_zero_end(n, h):
    """(n x n) forward differences of a vector whose entry n is zero."""
    return sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], shape=(n, n), format="csr") / h


@lru_cache(maxsize=32)
def operators(grid: MeridianGrid) -> ReducedOperators:
    Nr, nz = grid.Nr, grid.Nz - 1
    dr, dz = grid.dr, grid.dz
    r = grid.r

    # radial part: sum_i (beta_{i+1} - beta_i)^2 / (dr * rm_i) + (dr^2 / 2) a_0^2
    D = _diff_with_zero_end(Nr, dr) @ sp.diags(r**2)
    rm = (np.arange(Nr) + 1.0) * dr
    Kr = (D.T @ sp.diags(dr / rm) @ D).tolil()
    Kr[0, 0] += dr**2 / 2
    Kr = Kr.tocsr()

    # z part on interior nodes with zero caps
    Dz = sp.diags([np.ones(nz), -np.ones(nz)], [0, -1], shape=(nz + 1, nz), format="csr") / dz
    w_r3 = sp.diags(r**3 * dr)
    K = sp.kron(Kr, dz * sp.identity(nz)) + sp.kron(w_r3, dz * (Dz.T @ Dz))
    M = sp.kron(w_r3, dz * sp.identity(nz))
    rr, zz = grid.mesh()
    pts = np.stack([rr.ravel(), np.zeros(rr.size), zz.ravel()], axis=-1)
    return ReducedOperators(K.tocsr(), M.tocsr(), rr.ravel(), (rr * dr * dz).ravel(), pts)


def _require_radial(nl):
    if not getattr(nl, "is_radial", False):
        raise RegimeError("the azimuthal ansatz requires F(x, u) to depend on u only through |u|")
    if getattr(nl, "degenerate", False):
        raise RegimeError("the nonlinearity is degenerate (identically zero)")


class ReducedProblem:
    """J_Y and its gradient on a fixed meridian grid."""

    def __init__(self, grid: MeridianGrid, lam: float, nonlinearity):
        _require_radial(nonlinearity)
        self.grid = grid
        self.lam = float(lam)
        self.nonlinearity = nonlinearity
        self.ops = operators(grid)
        self.Q = (self.ops.K + self.lam * self.ops.M).tocsr()
        self.bound = nonlinearity.bind(self.ops.points)
        self._u = np.zeros((grid.size, 3))

    def _field(self, a):
        u = self._u.copy()
        u[:, 1] = self.ops.r * a
        return u

    def value(self, a):
        F = self.bound.F(self._field(a))
        return float(np.pi * a @ (self.Q @ a) - 2 * np.pi * self.ops.cell @ F)

    def value_and_grad(self, a):
        F, f = self.bound.F_and_f(self._field(a))
        Qa = self.Q @ a
        val = float(np.pi * a @ Qa - 2 * np.pi * self.ops.cell @ F)
        grad = 2 * np.pi * Qa - 2 * np.pi * f[:, 1] * self.ops.r * self.ops.cell
        return val, grad

    def quadratic(self, a):
        return float(np.pi * a @ (self.Q @ a))


def reduced_energy(state: AxisymState, lam, nonlinearity) -> float:
    return ReducedProblem(state.grid, lam, nonlinearity).value(state.flat)


def reduced_gradient(state: AxisymState, lam, nonlinearity) -> AxisymState:
    _, g = ReducedProblem(state.grid, lam, nonlinearity).value_and_grad(state.flat)
    return AxisymState(g, state.grid)


def reduced_curl_density(a, a_r, a_z, r):
    """|curl E|^2 for E = a (-x2, x1, 0) expressed through the profile."""
    return r**2 * a_z**2 + (2 * a + r * a_r) ** 2


# -- parity sectors -----------------------------------------------------------


def sector_basis(grid: MeridianGrid, sector: str) -> sp.csr_matrix:
    """Columns span the profiles that are even / odd under z -> H - z."""
    if sector not in SECTORS:
        raise ValueError(f"unknown sector {sector!r}; expected one of {SECTORS}")
    nz = grid.Nz - 1
    if sector == "all":
        return sp.identity(grid.size, format="csr")
    rows, cols, vals = [], [], []
    col = 0
    for j in range(nz):
        m = nz - 1 - j
        if j > m:
            break
        if j == m:
            if sector == "even":
                rows.append(j), cols.append(col), vals.append(1.0)
                col += 1
            continue
        rows += [j, m]
        cols += [col, col]
        vals += [1.0, 1.0 if sector == "even" else -1.0]
        col += 1
    Pz = sp.csr_matrix((vals, (rows, cols)), shape=(nz, col))
    return sp.kron(sp.identity(grid.Nr), Pz, format="csr")


def smallest_reduced_eigenvalue(grid: MeridianGrid, sector="all"):
    """Smallest mu with K a = mu M a on the sector (lam-independent)."""
    return _lowest_mode(grid, sector)[0]


def _lowest_mode(grid, sector):
    ops = operators(grid)
    P = sector_basis(grid, sector)
    K = (P.T @ ops.K @ P).tocsc()
    M = (P.T @ ops.M @ P).tocsc()
    if K.shape[0] < 8:
        from scipy.linalg import eigh

        w, v = eigh(K.toarray(), M.toarray())
    else:
        # fixed start vector: ARPACK otherwise draws a random one
        w, v = eigsh(K, k=1, M=M, sigma=0.0, which="LM", v0=np.ones(K.shape[0]))
    v = v[:, 0]
    return float(w[0]), v * np.sign(v[np.argmax(np.abs(v))])


def _rotation_symmetric(nl, grid, seed=0, n=64):
    """Sampled check that Gamma is invariant under rotations about the axis."""
    rng = np.random.default_rng(seed)
    R, H = grid.domain.R, grid.domain.H
    r = R * np.sqrt(rng.uniform(size=n))
    z = H * rng.uniform(size=n)
    th = rng.uniform(0, 2 * np.pi, size=n)
    s = rng.uniform(0.1, 2.0, size=n)
    x0 = np.stack([r, 0 * r, z], -1)
    x1 = np.stack([r * np.cos(th), r * np.sin(th), z], -1)
    u0 = np.stack([0 * s, s, 0 * s], -1)
    u1 = np.stack([-s * np.sin(th), s * np.cos(th), 0 * s], -1)
    a, b = nl.F(x0, u0), nl.F(x1, u1)
    return bool(np.allclose(a, b, rtol=1e-12, atol=1e-14))


def _reflection_symmetric(nl, grid, seed=1, n=64):
    rng = np.random.default_rng(seed)
    R, H = grid.domain.R, grid.domain.H
    r = R * rng.uniform(size=n)
    z = H * rng.uniform(size=n)
    s = rng.uniform(0.1, 2.0, size=n)
    u = np.stack([0 * s, s, 0 * s], -1)
    a = nl.F(np.stack([r, 0 * r, z], -1), u)
    b = nl.F(np.stack([r, 0 * r, H - z], -1), u)
    return bool(np.allclose(a, b, rtol=1e-12, atol=1e-14))


# -- classical Nehari solver -----------------------------------------------------


class _SectorMetric:
    """Sphere metric G = P^T Q P (scaled), factorized once."""

    def __init__(self, G):
        self.G = G.tocsc()
        self.lu = splu(self.G)

    def dot(self, a, b):
        return float(a @ (self.G @ b))

    def solve(self, g):
        return self.lu.solve(np.asarray(g, dtype=float))

    def normalize(self, a):
        return a / np.sqrt(self.dot(a, a))


def ray_scale(problem: ReducedProblem, a, t0=1.0):
    """t > 0 with d/dt J_Y(t a) = 0; the Nehari projection of a."""

    def g(t):
        return float(problem.value_and_grad(t * a)[1] @ a)

    if problem.quadratic(a) <= 0:
        raise RegimeError("direction has nonpositive quadratic energy")
    hi = max(t0, 1e-12)
    for _ in range(400):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the Nehari scaling")
    lo = hi / 2.0
    while g(lo) <= 0:
        lo /= 2.0
        if lo < 1e-300:
            raise ConvergenceError("Nehari scaling collapsed to zero")
    return brentq(g, lo, hi, xtol=1e-15 * hi, rtol=1e-15)


@dataclass
class SymmetricReport:
    sector: str
    c: float
    alpha: AxisymState
    t: float
    grad_norm: float
    el_residual: float
    nehari_residual: float
    iterations: int
    converged: bool
    min_eig: float
    run_values: list = field(default_factory=list)
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "sector": self.sector,
            "c": self.c,
            "c_hex": float(self.c).hex(),
            "t": self.t,
            "grad_norm": self.grad_norm,
            "el_residual": self.el_residual,
            "nehari_residual": self.nehari_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "min_eig": self.min_eig,
            "run_values": self.run_values,
            "run_values_hex": [float(v).hex() for v in self.run_values],
        }


def _check_regime(grid, lam, nl, sector):
    _require_radial(nl)
    if not _rotation_symmetric(nl, grid):
        raise RegimeError("the coefficient is not invariant under rotations about the x3-axis")
    if sector != "all" and not _reflection_symmetric(nl, grid):
        raise RegimeError("parity sectors need a coefficient symmetric under z -> H - z")
    mu = smallest_reduced_eigenvalue(grid, sector)
    if mu + lam <= 0:
        raise RegimeError(
            f"lambda below reduced spectrum (lambda = {lam}, smallest eigenvalue {mu:.6g}); "
            "symmetric solver restricted to definite regime"
        )
    return mu


def _descend(problem, P, metric, u0, cfg):
    last = {"t": 1.0}

    def evaluate(u):
        a = P @ u
        t = ray_scale(problem, a, last["t"])
        last["t"] = t
        val, g = problem.value_and_grad(t * a)
        return val, t * (P.T @ g), t

    return sphere_descent(evaluate, u0, metric, cfg)


def solve_symmetric(grid: MeridianGrid, lam, nonlinearity, sector="all", cfg: SolverConfig = SolverConfig(),
                    starts=()) -> SymmetricReport:
    """Least-energy Nehari point of J_Y restricted to a parity sector.

    ``starts`` are extra full-grid profiles used as initial directions (the
    ``all`` sector is seeded with the sector solutions so that its value is
    never above theirs).
    """
    mu = _check_regime(grid, lam, nonlinearity, sector)
    problem = ReducedProblem(grid, lam, nonlinearity)
    P = sector_basis(grid, sector)
    metric = _SectorMetric(2 * np.pi * (P.T @ problem.Q @ P))
    # least squares back-projection onto the sector coordinates
    PtP = splu((P.T @ P).tocsc())

    inits = [_lowest_mode(grid, sector)[1]]
    for a in starts:
        inits.append(PtP.solve(P.T @ np.asarray(a, dtype=float).ravel()))
    for k in range(1, cfg.restarts):
        rng = np.random.default_rng([cfg.seed, k, SECTORS.index(sector)])
        inits.append(inits[0] + 0.3 * np.linalg.norm(inits[0]) * rng.normal(size=P.shape[1]) / np.sqrt(P.shape[1]))

    runs = []
    for u0 in inits:
        try:
            runs.append(_descend(problem, P, metric, u0, cfg))
        except ConvergenceError as exc:
            log.info("symmetric start failed: %s", exc)
    ok = [r for r in runs if r.converged]
    if not ok:
        raise ConvergenceError(f"no {sector}-sector start converged")
    best = min(ok, key=lambda r: r.value)
    alpha = best.aux * (P @ metric.normalize(best.u))
    val, g = problem.value_and_grad(alpha)
    scale = 1.0 + abs(val)
    el = float(np.max(np.abs(P.T @ g)) / np.max(np.abs(P.T @ (2 * np.pi * problem.Q @ alpha))))
    return SymmetricReport(
        sector=sector,
        c=float(val),
        alpha=AxisymState(alpha, grid),
        t=float(best.aux),
        grad_norm=float(best.grad_norm),
        el_residual=el,
        nehari_residual=abs(float(g @ alpha)) / scale,
        iterations=best.iterations,
        converged=True,
        min_eig=mu,
        run_values=[float(r.value) for r in ok],
        history=best.history,
    )


def solve_sectors(grid: MeridianGrid, lam, nonlinearity, cfg: SolverConfig = SolverConfig(),
                  sectors=("even", "odd", "all")) -> dict:
    """Sector ground states; ``all`` is computed last, warm-started from the others."""
    parity = [s for s in sectors if s != "all"]

    def run(s):
        return solve_symmetric(grid, lam, nonlinearity, s, cfg)

    if cfg.threads > 1 and len(parity) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            reports = dict(zip(parity, pool.map(run, parity)))
    else:
        reports = {s: run(s) for s in parity}
    if "all" in sectors:
        seeds = [rep.alpha.flat for rep in reports.values()]
        reports["all"] = solve_symmetric(grid, lam, nonlinearity, "all", cfg, starts=seeds)
        others = [rep.c for s, rep in reports.items() if s != "all"]
        if others and reports["all"].c > min(others) * (1 + 1e-12):
            warnings.warn("all-sector value above a restricted sector value", stacklevel=2)
    return reports


# -- lifting to 3D ------------------------------------------------------------


class ProfileInterpolant:
    """Bilinear alpha(r, z) with zero walls and a mirrored ghost node below the axis."""

    def __init__(self, state: AxisymState):
        g = state.grid
        self.grid = g
        R, H = g.domain.R, g.domain.H
        self.rn = np.concatenate([[-0.5 * g.dr], g.r, [R]])
        self.zn = np.concatenate([[0.0], g.z, [H]])
        a = np.zeros((g.Nr + 2, g.Nz + 1))
        a[1:-1, 1:-1] = state.alpha
        a[0] = a[1]
        self.a = a

    def __call__(self, r, z):
        """(alpha, d_r alpha, d_z alpha) at arrays of points; zero outside the cylinder."""
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        inside = (r <= self.rn[-1]) & (z >= 0) & (z <= self.zn[-1])
        i = np.clip(np.searchsorted(self.rn, r, side="right") - 1, 0, len(self.rn) - 2)
        j = np.clip(np.searchsorted(self.zn, z, side="right") - 1, 0, len(self.zn) - 2)
        hr = self.rn[i + 1] - self.rn[i]
        hz = self.zn[j + 1] - self.zn[j]
        s = (r - self.rn[i]) / hr
        q = (z - self.zn[j]) / hz
        a00, a10 = self.a[i, j], self.a[i + 1, j]
        a01, a11 = self.a[i, j + 1], self.a[i + 1, j + 1]
        val = a00 * (1 - s) * (1 - q) + a10 * s * (1 - q) + a01 * (1 - s) * q + a11 * s * q
        ar = ((a10 - a00) * (1 - q) + (a11 - a01) * q) / hr
        az = ((a01 - a00) * (1 - s) + (a11 - a10) * s) / hz
        zero = ~inside
        return np.where(zero, 0, val), np.where(zero, 0, ar), np.where(zero, 0, az)


def azimuthal_field(points, profile):
    """E = a (-x2, x1, 0) and its Cartesian curl from ``profile(r, z) -> (a, a_r, a_z)``."""
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    r = np.hypot(x, y)
    a, a_r, a_z = profile(r, z)
    safe = np.where(r > 0, r, 1.0)
    a_x = np.where(r > 0, a_r * x / safe, 0.0)
    a_y = np.where(r > 0, a_r * y / safe, 0.0)
    E = np.stack([-y * a, x * a, np.zeros_like(a)], axis=-1)
    # J[:, i, j] = d E_i / d x_j
    J = np.zeros(points.shape + (3,))
    J[:, 0, 0], J[:, 0, 1], J[:, 0, 2] = -y * a_x, -a - y * a_y, -y * a_z
    J[:, 1, 0], J[:, 1, 1], J[:, 1, 2] = a + x * a_x, x * a_y, x * a_z
    curl = np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=-1)
    return E, curl, J


@dataclass
class LiftedField:
    """Azimuthal field sampled on a box-embedded uniform grid (zero outside the cylinder)."""

    origin: tuple
    spacing: tuple
    shape: tuple
    E: np.ndarray
    curlE: np.ndarray
    mask: np.ndarray


def lift_to_3d(state: AxisymState, n=32) -> LiftedField:
    """Sample the lift on an n^3 node grid covering [-R, R]^2 x [0, H]."""
    R, H = state.grid.domain.R, state.grid.domain.H
    xs = np.linspace(-R, R, n)
    zs = np.linspace(0.0, H, n)
    X, Y, Z = np.meshgrid(xs, xs, zs, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)
    mask = np.hypot(pts[:, 0], pts[:, 1]) < R
    E, curl, _ = azimuthal_field(pts, ProfileInterpolant(state))
    E[~mask] = 0.0
    curl[~mask] = 0.0
    shape = (n, n, n)
    return LiftedField((-R, -R, 0.0), (xs[1] - xs[0],) * 2 + (zs[1] - zs[0],), shape,
                       E.reshape(shape + (3,)), curl.reshape(shape + (3,)), mask.reshape(shape))


def cylinder_quadrature(grid: MeridianGrid, order=3, n_theta=8):
    """3D points and weights: Gauss rules on every meridian cell of the interpolant, uniform in angle."""
    interp_r = np.concatenate([[0.0], grid.r, [grid.domain.R]])
    interp_z = np.concatenate([[0.0], grid.z, [grid.domain.H]])
    xg, wg = np.polynomial.legendre.leggauss(order)

    def nodes(edges):
        a, b = edges[:-1, None], edges[1:, None]
        return ((a + b) / 2 + (b - a) / 2 * xg).ravel(), ((b - a) / 2 * wg).ravel()

    r, wr = nodes(interp_r)
    z, wz = nodes(interp_z)
    th = (np.arange(n_theta) + 0.5) * 2 * np.pi / n_theta
    Rr, Tt, Zz = np.meshgrid(r, th, z, indexing="ij")
    W = (wr * r)[:, None, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :, None] * wz[None, None, :]
    pts = np.stack([(Rr * np.cos(Tt)).ravel(), (Rr * np.sin(Tt)).ravel(), Zz.ravel()], axis=-1)
    return pts, W.ravel()


def lifted_energy(state: AxisymState, lam, nonlinearity, order=3, n_theta=8) -> float:
    """3D functional of the lifted interpolant, by Cartesian evaluation."""
    pts, w = cylinder_quadrature(state.grid, order, n_theta)
    E, curl, _ = azimuthal_field(pts, ProfileInterpolant(state))
    return functional_3d(w, E, curl, lam, nonlinearity, pts)


def lifted_weak_residual(state: AxisymState, lam, nonlinearity, tests, order=3, n_theta=8):
    """max |J'(lift)[Phi]| / |curl Phi|_2 over azimuthal test profiles ``tests``."""
    pts, w = cylinder_quadrature(state.grid, order, n_theta)
    E, curl, _ = azimuthal_field(pts, ProfileInterpolant(state))
    f = nonlinearity.f(pts, E)
    out = []
    for prof in tests:
        Phi, cPhi, _ = azimuthal_field(pts, prof)
        d = w @ (np.sum(curl * cPhi, -1) + lam * np.sum(E * Phi, -1) - np.sum(f * Phi, -1))
        out.append(abs(d) / np.sqrt(w @ np.sum(cPhi**2, -1)))
    return float(max(out))


def lifted_weak_divergence(state: AxisymState, potentials, order=3, n_theta=8):
    """max |int E . grad phi| / (|E|_2 |grad phi|_2) over ``potentials(points) -> (phi, grad phi)``."""
    pts, w = cylinder_quadrature(state.grid, order, n_theta)
    E, _, _ = azimuthal_field(pts, ProfileInterpolant(state))
    nE = np.sqrt(w @ np.sum(E**2, -1))
    out = []
    for pot in potentials:
        _, gphi = pot(pts)
        out.append(abs(w @ np.sum(E * gphi, -1)) / (nE * np.sqrt(w @ np.sum(gphi**2, -1))))
    return float(max(out))


def lifted_trace_residual(state: AxisymState, n=32):
    """Max |nu x E| over mask points adjacent to the wall of an n^3 box-embedded grid.

    The azimuthal field is tangential to every face of the cylinder, so the
    tangential trace is |E| itself.  Returns (h, residual).
    """
    lf = lift_to_3d(state, n)
    m = lf.mask
    pad = np.pad(m, 1, constant_values=False)
    interior = np.ones_like(m)
    for ax in range(3):
        for sh in (-1, 1):
            interior &= np.roll(pad, sh, axis=ax)[1:-1, 1:-1, 1:-1]
    # caps: the first and last z layers lie on the walls themselves
    edge = m & ~interior
    edge[:, :, 0] = edge[:, :, -1] = False
    edge |= m & (np.indices(m.shape)[2] == 1) | m & (np.indices(m.shape)[2] == m.shape[2] - 2)
    mag = np.linalg.norm(lf.E, axis=-1)
    return float(max(lf.spacing)), float(mag[edge].max())


__all__ = [
    "CylinderDomain", "MeridianGrid", "AxisymState", "ReducedProblem", "reduced_energy", "reduced_gradient",
    "reduced_curl_density", "sector_basis", "smallest_reduced_eigenvalue", "ray_scale", "solve_symmetric",
    "solve_sectors", "SymmetricReport", "ProfileInterpolant", "azimuthal_field", "lift_to_3d", "LiftedField",
    "lifted_energy", "lifted_weak_residual", "lifted_weak_divergence", "lifted_trace_residual",
    "cylinder_quadrature",
]
