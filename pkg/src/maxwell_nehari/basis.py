"""Cavity-mode spectral basis for H0(curl) on a rectangular box.

The box ``(0, L1) x (0, L2) x (0, L3)`` with perfect-conductor walls has
closed-form curl-curl eigenfields.  Every field used here, divergence-free
or gradient, has the separable form

    E_i(x) = c_i * prod_j g_ij(q_j x_j),   q_j = k_j pi / L_j,

with ``g_ij = cos`` when ``i == j`` and ``sin`` otherwise.  Tangential
components therefore vanish identically on every face.  Divergence-free
modes have ``c . q = 0`` and eigenvalue ``|q|^2``; gradient modes are
``grad(prod_j sin(q_j x_j))`` so ``c = q``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, RegimeError, StructureError

DIVFREE = "divfree"
GRADIENT = "gradient"

# relative slack when comparing eigenvalues against the cutoff / each other
_EIG_RTOL = 1e-12


@dataclass(frozen=True)
class BoxDomain:
    edges: tuple[float, float, float]

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        if len(edges) != 3 or not all(e > 0 and math.isfinite(e) for e in edges):
            raise ValueError(f"box edges must be three positive lengths, got {self.edges}")
        object.__setattr__(self, "edges", edges)

    @property
    def lengths(self):
        return np.asarray(self.edges)

    @property
    def volume(self):
        return float(np.prod(self.edges))


@dataclass(frozen=True)
class ModeIndex:
    k: tuple[int, int, int]
    kind: str
    polarization: int = 0

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        object.__setattr__(self, "k", k)
        if any(v < 0 for v in k):
            raise ValueError(f"mode indices must be nonnegative, got {k}")
        nonzero = sum(v >= 1 for v in k)
        if self.kind == GRADIENT:
            if nonzero != 3:
                raise ValueError(f"gradient modes need all k_i >= 1, got {k}")
            if self.polarization != 0:
                raise ValueError("gradient modes carry no polarization")
        elif self.kind == DIVFREE:
            if nonzero < 2:
                raise ValueError(f"divergence-free modes need two k_i >= 1, got {k}")
            npol = 2 if nonzero == 3 else 1
            if self.polarization not in range(npol):
                raise ValueError(f"mode {k} has {npol} polarization(s), got {self.polarization}")
        else:
            raise ValueError(f"unknown mode kind {self.kind!r}")


def wavevector(k, domain):
    return np.asarray(k, dtype=float) * np.pi / domain.lengths


def _raw_polarization(index: ModeIndex, domain: BoxDomain):
    """Unit amplitude vector c for a mode, before normalization."""
    q = wavevector(index.k, domain)
    if index.kind == GRADIENT:
        return q
    zeros = [j for j in range(3) if index.k[j] == 0]
    if zeros:
        # only the component along the zero axis survives (cos(0) = 1)
        c = np.zeros(3)
        c[zeros[0]] = 1.0
        return c
    c0 = np.array([-q[1], q[0], 0.0])
    c0 /= np.linalg.norm(c0)
    if index.polarization == 0:
        return c0
    c1 = np.cross(q, c0)
    return c1 / np.linalg.norm(c1)


def _mass(index: ModeIndex, c, domain: BoxDomain):
    """L2 norm squared of the separable field with amplitude c."""
    total = 0.0
    for i in range(3):
        if c[i] == 0.0:
            continue
        prod = c[i] ** 2
        for j in range(3):
            if index.k[j] >= 1:
                prod *= domain.edges[j] / 2
            elif i == j:
                prod *= domain.edges[j]
            else:
                prod = 0.0
        total += prod
    return total


@dataclass
class ModeBasis:
    """Truncated basis of V (divergence-free) and grad H^1_0 (gradient) fields.

    ``amplitudes`` holds the vector c of every field, divergence-free modes
    first.  ``mass`` is the L2 norm squared of each basis field, which is
    one for divergence-free modes when ``normalized`` is set and ``|q|^2``
    for gradient modes (their potentials are L2-normalized instead).
    """

    domain: BoxDomain
    cutoff: float
    divfree_modes: list
    divfree_eigs: np.ndarray
    gradient_modes: list
    gradient_eigs: np.ndarray
    amplitudes: np.ndarray
    mass: np.ndarray
    normalized: bool = True
    degenerate: bool = False
    _wavenumbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        modes = self.modes
        self._wavenumbers = (
            np.array([m.k for m in modes], dtype=float).reshape(-1, 3) * np.pi / self.domain.lengths
        )

    @property
    def modes(self):
        return list(self.divfree_modes) + list(self.gradient_modes)

    @property
    def n_divfree(self):
        return len(self.divfree_modes)

    @property
    def n_gradient(self):
        return len(self.gradient_modes)

    @property
    def size(self):
        return self.n_divfree + self.n_gradient

    @property
    def wavenumbers(self):
        return self._wavenumbers

    @property
    def divfree_mass(self):
        return self.mass[: self.n_divfree]

    @property
    def gradient_mass(self):
        return self.mass[self.n_divfree :]

    def kmax(self):
        """Largest mode index per axis over both families."""
        if self.size == 0:
            return np.zeros(3, dtype=int)
        return np.array([m.k for m in self.modes]).max(axis=0)

    def find(self, k, kind=DIVFREE, polarization=0):
        target = ModeIndex(tuple(k), kind, polarization)
        modes = self.divfree_modes if kind == DIVFREE else self.gradient_modes
        for i, m in enumerate(modes):
            if m == target:
                return i
        raise KeyError(f"mode {target} not in basis")

    def subset(self, divfree=(), gradient=()):
        """Basis restricted to the given positions of each family."""
        divfree = list(divfree)
        gradient = list(gradient)
        rows = divfree + [self.n_divfree + j for j in gradient]
        return ModeBasis(
            domain=self.domain,
            cutoff=self.cutoff,
            divfree_modes=[self.divfree_modes[i] for i in divfree],
            divfree_eigs=self.divfree_eigs[divfree],
            gradient_modes=[self.gradient_modes[j] for j in gradient],
            gradient_eigs=self.gradient_eigs[gradient],
            amplitudes=self.amplitudes[rows],
            mass=self.mass[rows],
            normalized=self.normalized,
            degenerate=len(divfree) == 0,
        )

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(repr(self.domain.edges).encode())
        h.update(repr(self.normalized).encode())
        for m in self.modes:
            h.update(f"{m.kind}:{m.k}:{m.polarization};".encode())
        return h.hexdigest()[:16]

    # -- pointwise evaluation -------------------------------------------------

    def evaluate(self, points, deriv=(0, 0, 0), rows=None):
        """Derivative ``deriv`` of each basis field at scattered points.

        Returns an array of shape ``(n_modes, n_points, 3)``.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        q = self._wavenumbers if rows is None else self._wavenumbers[rows]
        amp = self.amplitudes if rows is None else self.amplitudes[rows]
        out = np.empty((q.shape[0], points.shape[0], 3))
        for i in range(3):
            prod = np.ones((q.shape[0], points.shape[0]))
            for j in range(3):
                n = deriv[j]
                arg = q[:, j, None] * points[None, :, j] + n * np.pi / 2
                trig = np.cos(arg) if i == j else np.sin(arg)
                prod *= q[:, j, None] ** n * trig
            out[:, :, i] = amp[:, i, None] * prod
        return out

    def curl(self, points, rows=None):
        jac = {j: self.evaluate(points, tuple(int(a == j) for a in range(3)), rows) for j in range(3)}
        # jac[j][..., i] = d E_i / d x_j
        return np.stack(
            [
                jac[1][..., 2] - jac[2][..., 1],
                jac[2][..., 0] - jac[0][..., 2],
                jac[0][..., 1] - jac[1][..., 0],
            ],
            axis=-1,
        )

    def curl_curl(self, points, rows=None):
        """curl curl = grad div - Laplacian, from analytic second derivatives."""
        second = {}
        for a in range(3):
            for b in range(a, 3):
                d = [0, 0, 0]
                d[a] += 1
                d[b] += 1
                second[a, b] = second[b, a] = self.evaluate(points, tuple(d), rows)
        out = np.zeros_like(second[0, 0])
        for i in range(3):
            grad_div = sum(second[i, j][..., j] for j in range(3))
            lap = sum(second[j, j][..., i] for j in range(3))
            out[..., i] = grad_div - lap
        return out

    def divergence(self, points, rows=None):
        return sum(
            self.evaluate(points, tuple(int(a == j) for a in range(3)), rows)[..., j] for j in range(3)
        )

    # -- tensor-grid factors --------------------------------------------------

    def _axis_factors(self, grid, deriv=(0, 0, 0)):
        """factors[i][j] has shape (n_modes, n_j): 1D factor of component i along axis j."""
        q = self._wavenumbers
        factors = []
        for i in range(3):
            row = []
            for j in range(3):
                n = deriv[j]
                arg = q[:, j, None] * grid.nodes[j][None, :] + n * np.pi / 2
                trig = np.cos(arg) if i == j else np.sin(arg)
                row.append(q[:, j, None] ** n * trig)
            factors.append(row)
        return factors

    def mode_fields(self, grid):
        """All basis fields sampled on a tensor grid, shape (n_modes, n1, n2, n3, 3)."""
        g = self._axis_factors(grid)
        out = np.empty((self.size,) + tuple(grid.resolution) + (3,))
        for i in range(3):
            out[..., i] = np.einsum(
                "a,ax,ay,az->axyz", self.amplitudes[:, i], g[i][0], g[i][1], g[i][2], optimize=True
            )
        return out


def enumerate_modes(domain: BoxDomain, cutoff: float, normalized: bool = True) -> ModeBasis:
    """All cavity modes with ``|q|^2 <= cutoff``, sorted by eigenvalue."""
    cutoff = float(cutoff)
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    bound = cutoff * (1 + _EIG_RTOL)
    kmax = [int(math.floor(math.sqrt(bound) * L / math.pi)) for L in domain.edges]
    divfree, gradient = [], []
    for k in itertools.product(*(range(m + 1) for m in kmax)):
        q = wavevector(k, domain)
        eig = float(q @ q)
        if eig > bound:
            continue
        nonzero = sum(v >= 1 for v in k)
        if nonzero >= 2:
            for pol in range(2 if nonzero == 3 else 1):
                divfree.append((eig, k, pol))
        if nonzero == 3:
            gradient.append((eig, k, 0))
    divfree.sort()
    gradient.sort()

    d_modes = [ModeIndex(k, DIVFREE, pol) for _, k, pol in divfree]
    g_modes = [ModeIndex(k, GRADIENT, 0) for _, k, _ in gradient]
    amps, mass = [], []
    for m in d_modes + g_modes:
        c = _raw_polarization(m, domain)
        mm = _mass(m, c, domain)
        if normalized:
            if m.kind == DIVFREE:
                c = c / math.sqrt(mm)
                mm = 1.0
            else:
                # normalize the potential prod sin(q_j x_j) in L2
                scale = math.sqrt(np.prod(domain.lengths / 2))
                c = c / scale
                mm = mm / scale**2
        amps.append(c)
        mass.append(mm)

    degenerate = not d_modes
    if degenerate:
        warnings.warn(
            f"cutoff {cutoff} lies below the first curl-curl eigenvalue; basis has no divergence-free modes",
            stacklevel=2,
        )
    return ModeBasis(
        domain=domain,
        cutoff=cutoff,
        divfree_modes=d_modes,
        divfree_eigs=np.array([e for e, _, _ in divfree]),
        gradient_modes=g_modes,
        gradient_eigs=np.array([e for e, _, _ in gradient]),
        amplitudes=np.array(amps, dtype=float).reshape(-1, 3),
        mass=np.array(mass, dtype=float),
        normalized=normalized,
        degenerate=degenerate,
    )


# -- splitting ---------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSplit:
    """Partition of the divergence-free modes by the sign of ``lambda_k + lambda``.

    ``delta`` is the coercivity margin on the plus space; ``delta_tilde`` is
    the margin of strict negativity on the tilde space (zero when the
    kernel is nonempty or the tilde space is empty).
    """

    lam: float
    plus: np.ndarray
    tilde: np.ndarray
    kernel: np.ndarray
    delta: float
    delta_tilde: float

    @property
    def n(self):
        return len(self.tilde) + len(self.kernel)

    @property
    def requires_strict_convexity(self):
        return len(self.kernel) > 0

    @property
    def negative(self):
        """Tilde and kernel modes together, in basis order."""
        return np.sort(np.concatenate([self.tilde, self.kernel]))


def split_spaces(basis: ModeBasis, lam: float) -> SpaceSplit:
    lam = float(lam)
    if lam > 0:
        raise RegimeError(f"the 3D splitting needs lambda <= 0, got {lam}")
    if basis.degenerate or basis.n_divfree == 0:
        raise RegimeError("basis has no divergence-free modes")
    eigs = basis.divfree_eigs
    shifted = eigs + lam
    tol = _EIG_RTOL * max(1.0, abs(lam)) * 10
    kernel = np.flatnonzero(np.abs(shifted) <= tol)
    plus = np.flatnonzero(shifted > tol)
    tilde = np.flatnonzero(shifted < -tol)
    if plus.size == 0:
        raise RegimeError("quadratic part has no positive subspace at this cutoff; increase the cutoff")
    delta = float(np.min(shifted[plus] / eigs[plus]))
    if kernel.size or tilde.size == 0:
        delta_tilde = 0.0
    else:
        delta_tilde = float(-np.max(shifted[tilde] / eigs[tilde]))
    return SpaceSplit(lam, plus, tilde, kernel, delta, delta_tilde)


# -- states and grids --------------------------------------------------------


@dataclass
class StateVector:
    """Coefficients of ``E = v + grad w`` in a ModeBasis."""

    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.w = np.asarray(self.w, dtype=float)

    @classmethod
    def zeros(cls, basis):
        return cls(np.zeros(basis.n_divfree), np.zeros(basis.n_gradient))

    @classmethod
    def from_flat(cls, z, basis):
        z = np.asarray(z, dtype=float)
        if z.shape != (basis.size,):
            raise StructureError(f"expected {basis.size} coefficients, got shape {z.shape}")
        return cls(z[: basis.n_divfree].copy(), z[basis.n_divfree :].copy())

    @property
    def flat(self):
        return np.concatenate([self.v, self.w])

    def check(self, basis):
        if self.v.shape != (basis.n_divfree,) or self.w.shape != (basis.n_gradient,):
            raise StructureError(
                f"state blocks {self.v.shape}/{self.w.shape} do not match basis "
                f"({basis.n_divfree} divfree, {basis.n_gradient} gradient)"
            )

    def __add__(self, other):
        return StateVector(self.v + other.v, self.w + other.w)

    def __sub__(self, other):
        return StateVector(self.v - other.v, self.w - other.w)

    def __mul__(self, s):
        return StateVector(s * self.v, s * self.w)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Grid:
    """Tensor-product sample grid with per-axis quadrature weights."""

    domain: BoxDomain
    nodes: tuple
    weights: tuple
    kind: str

    @property
    def resolution(self):
        return tuple(len(n) for n in self.nodes)

    def points(self):
        mesh = np.meshgrid(*self.nodes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def weight_tensor(self):
        w = self.weights
        return w[0][:, None, None] * w[1][None, :, None] * w[2][None, None, :]


def gauss_grid(domain: BoxDomain, resolution) -> Grid:
    if np.isscalar(resolution):
        resolution = (int(resolution),) * 3
    nodes, weights = [], []
    for n, L in zip(resolution, domain.edges):
        x, w = np.polynomial.legendre.leggauss(int(n))
        nodes.append((x + 1) * L / 2)
        weights.append(w * L / 2)
    return Grid(domain, tuple(nodes), tuple(weights), "gauss")


def uniform_grid(domain: BoxDomain, resolution) -> Grid:
    """Vertex grid including the walls, with trapezoid weights (for export)."""
    if np.isscalar(resolution):
        resolution = (int(resolution),) * 3
    nodes, weights = [], []
    for n, L in zip(resolution, domain.edges):
        x = np.linspace(0.0, L, int(n))
        w = np.full(int(n), L / (int(n) - 1))
        w[[0, -1]] /= 2
        nodes.append(x)
        weights.append(w)
    return Grid(domain, tuple(nodes), tuple(weights), "uniform")


def gauss_points_for_frequency(kfreq):
    """Gauss-Legendre points integrating cos(K pi x / L), K <= kfreq, to ~1e-14."""
    return int(math.ceil(1.1 * kfreq)) + 12


def dealiased_resolution(basis: ModeBasis, p: float = 2.0):
    """Per-axis resolution for integrands built from ``ceil(p)`` mode factors."""
    kmax = basis.kmax()
    factors = max(2, int(math.ceil(p)))
    return tuple(
        max((math.ceil(p / 2) + 1) * int(k), gauss_points_for_frequency(factors * int(k))) for k in kmax
    )


@dataclass
class GridField:
    grid: Grid
    values: np.ndarray

    def integrate(self, density):
        return float(np.einsum("xyz,xyz->", self.grid.weight_tensor(), density))


def synthesize(state: StateVector, basis: ModeBasis, grid: Grid) -> GridField:
    state.check(basis)
    coef = state.flat
    g = basis._axis_factors(grid)
    values = np.empty(tuple(grid.resolution) + (3,))
    for i in range(3):
        values[..., i] = np.einsum(
            "a,ax,ay,az->xyz", coef * basis.amplitudes[:, i], g[i][0], g[i][1], g[i][2], optimize=True
        )
    return GridField(grid, values)


def synthesize_curl(state: StateVector, basis: ModeBasis, grid: Grid) -> GridField:
    state.check(basis)
    coef = state.flat
    jac = []
    for j in range(3):
        g = basis._axis_factors(grid, tuple(int(a == j) for a in range(3)))
        comps = np.empty(tuple(grid.resolution) + (3,))
        for i in range(3):
            comps[..., i] = np.einsum(
                "a,ax,ay,az->xyz", coef * basis.amplitudes[:, i], g[i][0], g[i][1], g[i][2], optimize=True
            )
        jac.append(comps)
    curl = np.stack(
        [
            jac[1][..., 2] - jac[2][..., 1],
            jac[2][..., 0] - jac[0][..., 2],
            jac[0][..., 1] - jac[1][..., 0],
        ],
        axis=-1,
    )
    return GridField(grid, curl)


def inner_products(field: GridField, basis: ModeBasis):
    """Quadrature L2 inner products of a sampled field with every basis field."""
    grid = field.grid
    g = basis._axis_factors(grid)
    wt = grid.weight_tensor()
    out = np.zeros(basis.size)
    for i in range(3):
        out += basis.amplitudes[:, i] * np.einsum(
            "xyz,ax,ay,az->a", wt * field.values[..., i], g[i][0], g[i][1], g[i][2], optimize=True
        )
    return out


def project(field: GridField, basis: ModeBasis, band=None) -> StateVector:
    """L2 projection onto the basis by Gauss quadrature.

    ``band`` is the highest mode index per axis assumed present in the
    field; products with the basis must be integrated exactly.
    """
    grid = field.grid
    if grid.kind != "gauss":
        raise AliasingError("projection needs a Gauss-Legendre grid")
    kb = basis.kmax() if band is None else np.maximum(np.asarray(band), basis.kmax())
    required = tuple(gauss_points_for_frequency(int(a) + int(b)) for a, b in zip(kb, basis.kmax()))
    if any(n < r for n, r in zip(grid.resolution, required)):
        raise AliasingError(
            f"grid {grid.resolution} under-resolves mode products; need at least {required}",
            required=required,
        )
    coef = inner_products(field, basis) / basis.mass
    return StateVector.from_flat(coef, basis)


def resolvent(f_coeffs, basis: ModeBasis):
    """Coefficients of (curl curl + 1)^{-1} applied to a divergence-free field."""
    f_coeffs = np.asarray(f_coeffs, dtype=float)
    if f_coeffs.shape != (basis.n_divfree,):
        raise StructureError(f"expected {basis.n_divfree} divergence-free coefficients")
    return f_coeffs / (basis.divfree_eigs + 1.0)


def l2_inner(a: StateVector, b: StateVector, basis: ModeBasis):
    return float(np.sum(basis.mass * a.flat * b.flat))


# -- boundary diagnostics ----------------------------------------------------


def face_samples(domain: BoxDomain, samples_per_face: int, rng=None):
    """Points and outward normals on the six faces (tensor grid plus random points)."""
    n = int(samples_per_face)
    pts, normals = [], []
    L = domain.lengths
    s = np.linspace(0.0, 1.0, n)
    uu, vv = np.meshgrid(s, s, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    if rng is not None:
        extra = rng.random((2, n * n))
        uu = np.concatenate([uu, extra[0]])
        vv = np.concatenate([vv, extra[1]])
    for axis in range(3):
        a, b = [j for j in range(3) if j != axis]
        for side in (0.0, 1.0):
            p = np.empty((uu.size, 3))
            p[:, axis] = side * L[axis]
            p[:, a] = uu * L[a]
            p[:, b] = vv * L[b]
            nu = np.zeros(3)
            nu[axis] = 1.0 if side else -1.0
            pts.append(p)
            normals.append(np.broadcast_to(nu, p.shape))
    return np.concatenate(pts), np.concatenate(normals)


def trace_residual_of(field_fn, domain: BoxDomain, samples_per_face: int, seed=0):
    """max |nu x E| over face samples for a callable ``points -> (P, 3)``."""
    if samples_per_face < 4:
        raise ValueError("need at least 4 samples per face")
    pts, normals = face_samples(domain, samples_per_face, np.random.default_rng(seed))
    values = field_fn(pts)
    return float(np.max(np.linalg.norm(np.cross(normals, values), axis=-1)))


def boundary_trace_residual(state: StateVector, basis: ModeBasis, samples_per_face: int = 8):
    state.check(basis)
    coef = state.flat

    def field_fn(pts):
        return np.einsum("a,apc->pc", coef, basis.evaluate(pts))

    return trace_residual_of(field_fn, basis.domain, samples_per_face)
