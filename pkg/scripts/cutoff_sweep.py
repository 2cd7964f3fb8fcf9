"""Ground-state level c0 of the box problem as the spectral cutoff grows."""

import argparse
import math
import time

import numpy as np

from maxwell_nehari.basis import BoxDomain, enumerate_modes
from maxwell_nehari.energy import EnergyContext
from maxwell_nehari.nehari import SolverConfig, ground_state
from maxwell_nehari.nonlinearity import NonlinearitySpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoffs", type=float, nargs="+", default=[3.5, 5.5, 6.5, 9.5])
    ap.add_argument("--lam", type=float, nargs="+", default=[0.0, -1.0, -2.5])
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--M", type=float, nargs=3, default=[1.0, 1.0, 1.0], help="diagonal of M")
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    nl = NonlinearitySpec.power(args.p, M=np.diag(args.M))
    cube = BoxDomain((math.pi,) * 3)
    cfg = SolverConfig(restarts=args.restarts, threads=args.threads)
    print(f"{'lambda':>7} {'cutoff':>7} {'dim':>5} {'c0':>14} {'|v|_V':>8} {'EL res':>9} {'sec':>6}")
    for lam in args.lam:
        for K in args.cutoffs:
            ctx = EnergyContext(enumerate_modes(cube, K), lam, nl)
            t = time.perf_counter()
            rep = ground_state(ctx, cfg)
            print(f"{lam:7.2f} {K:7.2f} {ctx.size:5d} {rep.c0:14.8f} {rep.norms['v_V']:8.4f} "
                  f"{rep.el_residual:9.1e} {time.perf_counter() - t:6.1f}")


if __name__ == "__main__":
    main()
