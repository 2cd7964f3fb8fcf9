"""Sphere-descent solver against the brute-force dense oracle on small truncations."""

import argparse
import math

import numpy as np

from maxwell_nehari.basis import BoxDomain, enumerate_modes
from maxwell_nehari.energy import EnergyContext
from maxwell_nehari.nehari import ground_state, oracle_dense
from maxwell_nehari.nonlinearity import NonlinearitySpec

MODELS = {
    "quartic": NonlinearitySpec.power(4),
    "aniso_cubic": NonlinearitySpec.power(3, M=np.diag([2.0, 1.0, 1.0])),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoff", type=float, default=3.5)
    ap.add_argument("--lam", type=float, nargs="+", default=[0.0, -1.0, -2.5])
    ap.add_argument("--directions", type=int, default=200)
    args = ap.parse_args()

    basis = enumerate_modes(BoxDomain((math.pi,) * 3), args.cutoff)
    print(f"dimension {basis.size}")
    print(f"{'lambda':>7} {'model':>12} {'c0':>18} {'oracle':>18} {'rel diff':>9} {'spread':>9}")
    for lam in args.lam:
        for name, nl in MODELS.items():
            ctx = EnergyContext(basis, lam, nl)
            c0 = ground_state(ctx).c0
            orc = oracle_dense(ctx, n_directions=args.directions)
            co = orc["c0_oracle"]
            print(f"{lam:7.2f} {name:>12} {c0:18.12f} {co:18.12f} {abs(c0 - co) / c0:9.1e} {orc['cluster_spread']:9.1e}")


if __name__ == "__main__":
    main()
