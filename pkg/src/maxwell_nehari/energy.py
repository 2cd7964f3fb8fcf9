"""Energy J(v, w) = 1/2 |curl v|^2 + lambda/2 |v + grad w|^2 - int F(x, v + grad w).

Quadratic parts are diagonal in the cavity basis; the potential term is
evaluated pseudo-spectrally (synthesize on a Gauss grid, apply F pointwise,
integrate).  The gradient is the exact adjoint of that discretization, so
finite differences of :func:`J_eval` reproduce :func:`J_grad` to rounding.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .basis import (
    Grid,
    ModeBasis,
    SpaceSplit,
    StateVector,
    dealiased_resolution,
    gauss_grid,
    split_spaces,
)
from .errors import AliasingError, RegimeError


@dataclass
class EnergyBreakdown:
    total: float
    quad_curl: float
    quad_lambda: float
    potential: float
    I_value: float

    def to_dict(self):
        return asdict(self)


class EnergyContext:
    """Immutable evaluation context: basis, splitting, nonlinearity and quadrature."""

    def __init__(self, basis: ModeBasis, lam: float, nonlinearity, grid: Grid | None = None,
                 split: SpaceSplit | None = None, p_norm: float | None = None):
        if getattr(nonlinearity, "degenerate", False):
            raise RegimeError("the nonlinearity is degenerate (identically zero)")
        self.basis = basis
        self.lam = float(lam)
        self.nonlinearity = nonlinearity
        self.split = split_spaces(basis, lam) if split is None else split
        if self.split.lam != self.lam:
            raise ValueError("split was computed for a different lambda")
        p = nonlinearity.p_max or 4.0
        self.p_norm = float(p if p_norm is None else p_norm)
        required = dealiased_resolution(basis, p)
        if grid is None:
            grid = gauss_grid(basis.domain, required)
        elif grid.kind != "gauss" or any(n < r for n, r in zip(grid.resolution, required)):
            raise AliasingError(f"grid {grid.resolution} violates the de-aliasing rule {required}",
                                required=required)
        self.grid = grid

        self.n_div = basis.n_divfree
        self.phi = basis.mode_fields(grid).reshape(basis.size, -1, 3)
        self.weights = grid.weight_tensor().ravel()
        self.points = grid.points()
        self.bound = nonlinearity.bind(self.points)
        self.curl_diag = np.concatenate([basis.divfree_eigs * basis.divfree_mass,
                                         np.zeros(basis.n_gradient)])
        self.mass = basis.mass.copy()
        self.quad_diag = self.curl_diag + self.lam * self.mass

        s = self.split
        self.plus_idx = np.asarray(s.plus, dtype=int)
        self.tilde_idx = np.concatenate([s.negative, self.n_div + np.arange(basis.n_gradient)]).astype(int)

    @property
    def size(self):
        return self.basis.size

    def with_nonlinearity(self, nonlinearity):
        return EnergyContext(self.basis, self.lam, nonlinearity, self.grid, self.split, self.p_norm)

    # -- flat-vector kernels ---------------------------------------------------

    def field(self, z):
        return np.tensordot(z, self.phi, axes=(0, 0))

    def value(self, z):
        E = self.field(z)
        return 0.5 * float(np.sum(self.quad_diag * z * z)) - float(self.weights @ self.bound.F(E))

    def value_and_grad(self, z):
        E = self.field(z)
        F, f = self.bound.F_and_f(E)
        val = 0.5 * float(np.sum(self.quad_diag * z * z)) - float(self.weights @ F)
        grad = self.quad_diag * z - np.einsum("apc,pc->a", self.phi, self.weights[:, None] * f)
        return val, grad

    def hessian(self, z, rows=None):
        """Second derivative matrix, optionally restricted to ``rows`` x ``rows``."""
        E = self.field(z)
        jac = self.bound.jac(E)
        phi = self.phi if rows is None else self.phi[rows]
        jphi = np.einsum("pij,bpj->bpi", jac, phi)
        H = -np.einsum("api,bpi->ab", phi * self.weights[None, :, None], jphi)
        diag = self.quad_diag if rows is None else self.quad_diag[rows]
        H[np.diag_indices_from(H)] += diag
        return H


def _flat(state, ctx):
    state.check(ctx.basis)
    return state.flat


def J_eval(state: StateVector, ctx: EnergyContext) -> EnergyBreakdown:
    z = _flat(state, ctx)
    E = ctx.field(z)
    potential = float(ctx.weights @ ctx.bound.F(E))
    quad_curl = 0.5 * float(np.sum(ctx.curl_diag * z * z))
    quad_lambda = 0.5 * ctx.lam * float(np.sum(ctx.mass * z * z))
    neg = ctx.split.negative
    vt_norm2 = float(np.sum(ctx.curl_diag[neg] * z[neg] ** 2))
    return EnergyBreakdown(
        total=quad_curl + quad_lambda - potential,
        quad_curl=quad_curl,
        quad_lambda=quad_lambda,
        potential=potential,
        I_value=-0.5 * vt_norm2 - quad_lambda + potential,
    )


def J_grad(state: StateVector, ctx: EnergyContext) -> StateVector:
    """Coefficient gradient: (lambda_k + lambda) m_k v_k - <f(E), e_k> per block."""
    _, g = ctx.value_and_grad(_flat(state, ctx))
    return StateVector.from_flat(g, ctx.basis)


def norms(state: StateVector, ctx: EnergyContext) -> dict:
    z = _flat(state, ctx)
    v_V = float(np.sqrt(np.sum(ctx.curl_diag * z * z)))
    v_2 = float(np.sqrt(np.sum(ctx.mass[: ctx.n_div] * z[: ctx.n_div] ** 2)))
    G = np.tensordot(z[ctx.n_div :], ctx.phi[ctx.n_div :], axes=(0, 0))
    p = ctx.p_norm
    gw_p = float((ctx.weights @ np.linalg.norm(G, axis=-1) ** p) ** (1 / p))
    return {"v_V": v_V, "v_L2": v_2, "grad_w_Lp": gw_p, "total": float(np.hypot(v_V, gw_p))}


def functional_3d(weights, E, curlE, lam, nonlinearity, points):
    """1/2 int |curl E|^2 + lambda/2 int |E|^2 - int F(x, E) from sampled values."""
    F = nonlinearity.F(points, E)
    return float(
        0.5 * weights @ np.sum(curlE**2, axis=-1)
        + 0.5 * lam * weights @ np.sum(E**2, axis=-1)
        - weights @ F
    )
