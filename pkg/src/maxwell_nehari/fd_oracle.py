"""Finite-difference (Yee staggered grid) curl-curl eigensolver for a PEC box.

Independent of the closed-form cavity modes; used to cross-check the
spectrum.  The gradient kernel is lifted out of the way with a grad-div
penalty: on a staggered grid ``curl grad = 0`` exactly, so the spectrum of
``C^T C + s G G^T`` is the nonzero curl-curl spectrum together with ``s``
times the discrete Dirichlet Laplacian.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh


def _diff(n_out, n_in, offset, h):
    """(u[i + offset] - u[i + offset - 1]) / h mapped from n_in unknowns to n_out rows."""
    rows = np.arange(n_out)
    data, r, c = [], [], []
    for col, sign in ((rows + offset, 1.0), (rows + offset - 1, -1.0)):
        ok = (col >= 0) & (col < n_in)
        data.append(np.full(ok.sum(), sign / h))
        r.append(rows[ok])
        c.append(col[ok])
    return sp.csr_matrix((np.concatenate(data), (np.concatenate(r), np.concatenate(c))), shape=(n_out, n_in))


def _eye(n):
    return sp.identity(n, format="csr")


def _kron3(a, b, c):
    return sp.kron(sp.kron(a, b), c, format="csr")


def yee_operators(edges, n):
    """Curl (edges -> faces) and gradient (nodes -> edges) on an n^3 Yee grid.

    Unknowns are the interior tangential edges; boundary edges carry the
    PEC condition and are eliminated, and so do the wall-normal faces,
    whose flux vanishes with them.
    """
    hx, hy, hz = (L / n for L in edges)
    N, I = n, n - 1
    dx, dy, dz = (_diff(N, I, 0, h) for h in (hx, hy, hz))
    eN, eI = _eye(N), _eye(I)

    # layouts: Ex (N, I, I), Ey (I, N, I), Ez (I, I, N); potentials (I, I, I)
    G = sp.vstack([_kron3(dx, eI, eI), _kron3(eI, dy, eI), _kron3(eI, eI, dz)], format="csr")

    # faces: Bx (I, N, N), By (N, I, N), Bz (N, N, I)
    dy_ez = _kron3(eI, dy, eN)
    dz_ey = _kron3(eI, eN, dz)
    dz_ex = _kron3(eN, eI, dz)
    dx_ez = _kron3(dx, eI, eN)
    dx_ey = _kron3(dx, eN, eI)
    dy_ex = _kron3(eN, dy, eI)
    C = sp.bmat(
        [
            [None, -dz_ey, dy_ez],
            [dz_ex, None, -dx_ez],
            [-dy_ex, dx_ey, None],
        ],
        format="csr",
    )
    return C, G


def yee_curlcurl_eigenvalues(edges, n, upper, nev=60):
    """Nonzero discrete curl-curl eigenvalues below ``upper``, ascending."""
    C, G = yee_operators(edges, n)
    lap_min = sum((np.pi / L) ** 2 for L in edges)
    penalty = 4.0 * upper / lap_min
    A = (C.T @ C + penalty * (G @ G.T)).tocsc()
    k = min(nev, A.shape[0] - 2)
    vals = eigsh(A, k=k, sigma=0.0, which="LM", return_eigenvectors=False)
    vals = np.sort(vals)
    return vals[vals <= upper]
