"""File emission: spectrum CSV, JSON reports, legacy VTK, meridian profiles.

Floats are written with ``repr`` (shortest round-trip); reports also carry
hex-float copies of the headline numbers for exact regression.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_spectrum_csv(path, basis):
    """One row per divergence-free mode: index, k1, k2, k3, kind, polarization, eigenvalue."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "k1", "k2", "k3", "kind", "polarization", "eigenvalue"])
        for i, (m, lam) in enumerate(zip(basis.divfree_modes, basis.divfree_eigs)):
            w.writerow([i, *m.k, m.kind, m.polarization, repr(float(lam))])


def read_spectrum_csv(path):
    with open(path, newline="") as fh:
        return [float(row["eigenvalue"]) for row in csv.DictReader(fh)]


def write_vtk(path, origin, spacing, shape, vectors: dict, title="maxwell-nehari field"):
    """Legacy ASCII STRUCTURED_POINTS with one VECTORS block per entry of ``vectors``.

    Arrays have shape ``shape + (3,)`` in (x, y, z) index order; VTK wants x
    varying fastest, hence the transpose.
    """
    nx, ny, nz = shape
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(repr(float(o)) for o in origin),
        "SPACING " + " ".join(repr(float(s)) for s in spacing),
        f"POINT_DATA {nx * ny * nz}",
    ]
    for name, arr in vectors.items():
        arr = np.asarray(arr, dtype=float).reshape(nx, ny, nz, 3).transpose(2, 1, 0, 3).reshape(-1, 3)
        lines.append(f"VECTORS {name} double")
        lines.extend(" ".join(repr(float(c)) for c in row) for row in arr)
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_vectors(path):
    """Minimal reader for files produced by :func:`write_vtk` (used in tests)."""
    text = Path(path).read_text().splitlines()
    dims = tuple(int(v) for v in next(l for l in text if l.startswith("DIMENSIONS")).split()[1:])
    npts = int(np.prod(dims))
    out = {}
    for i, line in enumerate(text):
        if line.startswith("VECTORS"):
            name = line.split()[1]
            rows = np.array([[float(c) for c in l.split()] for l in text[i + 1 : i + 1 + npts]])
            out[name] = rows.reshape(dims[2], dims[1], dims[0], 3).transpose(2, 1, 0, 3)
    return dims, out


def write_profile_csv(path, state):
    """Meridian profile (r, z, alpha) at the unknown nodes."""
    rr, zz = state.grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "z", "alpha"])
        for r, z, a in zip(rr.ravel(), zz.ravel(), state.alpha.ravel()):
            w.writerow([repr(float(r)), repr(float(z)), repr(float(a))])
