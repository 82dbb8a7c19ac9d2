"""Mass drift and second-order energy drift of the Strang integrator.

    python scripts/conservation.py [--t-end 50] [--dt 0.05]
"""

import argparse

from relhartree.experiments import conservation_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--dt", type=float, default=0.05)
    args = ap.parse_args()
    print(f"{'lambda':>7} {'mass drift':>12} {'E drift dt':>12} {'E drift dt/2':>13} {'ratio':>8}")
    for lam in (1.0, -1.0):
        c = conservation_check(lam, args.dt, args.t_end)
        d0, d1 = c["energy_drift"]
        print(f"{lam:7.1f} {c['mass_drift']:12.3e} {d0:12.3e} {d1:13.3e} {c['energy_ratio']:8.4f}")


if __name__ == "__main__":
    main()
