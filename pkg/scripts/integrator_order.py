"""Strang vs RK4-on-the-profile discrepancy at t = 1 under dt halving."""

import argparse

from relhartree.experiments import integrator_discrepancy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.05)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    dts = [0.1 / 2**k for k in range(args.levels)]
    out = integrator_discrepancy(dts, t=1.0, amplitude=args.amplitude)
    prev = None
    for dt, d in zip(out["dt"], out["discrepancy"]):
        ratio = "" if prev is None else f"{prev / d:8.4f}"
        print(f"dt {dt:9.5f}  max|u_strang - u_rk4| {d:.4e}  {ratio}")
        prev = d


if __name__ == "__main__":
    main()
