"""Small-data run: W^{7,inf} decay and Cauchy rates of the interaction profile.

Pass --coupling -1 to see the focusing case, which is outside the small-data
regime the verdicts are written for.
"""

import argparse

from relhartree import harness
from relhartree.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--coupling", type=float)
    ap.add_argument("--amplitude", type=float)
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    flat = load_config(args.config) if args.config else {}
    if args.coupling is not None:
        flat["potential.coupling"] = args.coupling
    if args.amplitude is not None:
        flat["initial.amplitude"] = args.amplitude
    rec = harness.run_command("scattering", flat, 0, args.out)
    ts = rec.series
    print(f"{'t':>6} {'wkinf:7':>12} {'cauchy_h:1':>12} {'cauchy_w2h:5':>13}")
    for i in range(0, len(ts), 4):
        print(f"{ts.times[i]:6.1f} {ts['wkinf:7'][i]:12.4e} {ts['cauchy_h:1'][i]:12.4e} {ts['cauchy_w2h:5'][i]:13.4e}")
    for v in rec.verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}: {v.measured}")
    print(rec.directory)


if __name__ == "__main__":
    main()
