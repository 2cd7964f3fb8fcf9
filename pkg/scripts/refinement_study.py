"""Axisymmetric ground states on a cylinder under grid refinement.

Prints, per level, the sector energies, the gap between the reduced energy and
the quadrature energy of the 3D lift, and the lifted wall trace residual.
"""

import argparse
import math

import numpy as np

from maxwell_nehari.axisym import CylinderDomain, MeridianGrid, lifted_energy, lifted_trace_residual, solve_sectors
from maxwell_nehari.nonlinearity import NonlinearitySpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--lam", type=float, default=0.0)
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--R", type=float, default=math.pi)
    ap.add_argument("--H", type=float, default=math.pi)
    args = ap.parse_args()

    nl = NonlinearitySpec.power(args.p)
    dom = CylinderDomain(args.R, args.H)
    gaps = []
    print(f"{'N':>4} {'c_even':>12} {'c_odd':>12} {'c_all':>12} {'J_3d(lift)':>12} {'gap':>10} {'trace':>8}")
    for n in args.levels:
        reps = solve_sectors(MeridianGrid(dom, n, n), args.lam, nl)
        best = reps["all"]
        J3 = lifted_energy(best.alpha, args.lam, nl)
        _, tr = lifted_trace_residual(best.alpha, 2 * n)
        gaps.append(abs(best.c - J3))
        print(f"{n:4d} {reps['even'].c:12.6f} {reps['odd'].c:12.6f} {best.c:12.6f} {J3:12.6f} {gaps[-1]:10.3e} {tr:8.4f}")
    if len(gaps) > 1:
        orders = np.log(np.array(gaps[:-1]) / gaps[1:]) / np.log(np.array(args.levels[1:]) / args.levels[:-1])
        print("observed orders:", " ".join(f"{o:.2f}" for o in orders))


if __name__ == "__main__":
    main()
