"""C(m) estimates for the m_1 symbol at L, 2L, 4L and their convergence in the grid size."""

import argparse
import time

from relhartree.analysis import estimate_cm_norm, m1_symbol


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=0.125)
    ap.add_argument("--points", type=int, nargs="*", default=[24, 32, 40])
    args = ap.parse_args()
    for n in args.points:
        t0 = time.time()
        vals = []
        for k in range(3):
            L = args.L * 2**k
            vals.append(estimate_cm_norm(m1_symbol(L, 1, 1), (2.1 * L, 2.1), (n, n)))
        ratios = " ".join(f"{vals[k] / vals[k + 1]:7.3f}" for k in range(2))
        print(f"n {n:3d}  C = {' '.join(f'{v:10.4e}' for v in vals)}  C(L)/C(2L) {ratios}  ({time.time() - t0:.1f} s)")
    print("L^-2 law predicts 4; the accepted band is [1, 16]")


if __name__ == "__main__":
    main()
