"""Closed-form cavity spectrum against a Yee finite-difference curl-curl eigensolve."""

import argparse
import math
import time

import numpy as np

from maxwell_nehari.basis import BoxDomain, enumerate_modes
from maxwell_nehari.fd_oracle import yee_curlcurl_eigenvalues


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--edges", type=float, nargs=3, default=[math.pi] * 3)
    ap.add_argument("--cutoff", type=float, default=6.5)
    ap.add_argument("--n", type=int, nargs="+", default=[8, 12, 16])
    args = ap.parse_args()

    exact = np.sort(enumerate_modes(BoxDomain(tuple(args.edges)), args.cutoff).divfree_eigs)
    print(f"{exact.size} modes below {args.cutoff}")
    for n in args.n:
        t = time.perf_counter()
        fd = np.sort(yee_curlcurl_eigenvalues(tuple(args.edges), n, 1.05 * args.cutoff, nev=exact.size + 20))
        fd = fd[: exact.size]
        if fd.size < exact.size:
            print(f"n={n}: only {fd.size} discrete eigenvalues found")
            continue
        err = np.abs(fd - exact) / exact
        print(f"n={n:3d}  max rel err {err.max():.3e}  ({time.perf_counter() - t:.1f}s)")


if __name__ == "__main__":
    main()
