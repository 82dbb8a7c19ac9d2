"""Moduli under the 'zero' zero-mode policy vs a constant kernel offset.

The offset only changes the global phase, so |u| must agree to roundoff.
"""

import argparse

from relhartree.experiments import gauge_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=20.0)
    ap.add_argument("--offsets", type=float, nargs="*", default=[None, 1.0, -5.0, 100.0])
    args = ap.parse_args()
    for c in args.offsets:
        out = gauge_check(args.t_end, c)
        rel = max(v[2] for v in out["norms"].values())
        print(f"offset {out['offset']:10.4f}  max| |u0| - |u1| | {out['max_abs_modulus_diff']:.2e}  worst norm rel {rel:.2e}")


if __name__ == "__main__":
    main()
