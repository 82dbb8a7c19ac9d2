"""lambda = 0 decay fits (sup norm, nonlinear term, LP pieces of |u|^2) with plots.

Writes a run record under --out and prints the fitted exponents.
"""

import argparse

from relhartree import harness
from relhartree.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="optional overrides (flat dotted keys)")
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    flat = load_config(args.config) if args.config else {}
    rec = harness.run_command("linear-decay", flat, 0, args.out)
    for name, fit in rec.fits.items():
        print(f"{name:22s} {fit.exponent:8.4f}  r^2 {fit.r_squared:.5f}")
    for v in rec.verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name} target {v.target}")
    print(rec.directory)


if __name__ == "__main__":
    main()
