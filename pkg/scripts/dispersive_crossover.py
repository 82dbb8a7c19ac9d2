"""Local decay slopes of ||e^{it<D>} S_N phi||_inf, showing where each shell turns asymptotic.

For N >= 2 the shell disperses radially only through omega'' = <xi>^-3, so the
t^-1 regime starts late (t of order a few hundred for N = 2).  The default
grid is large enough to reach t = 180 before wrap-around; it takes a few
minutes and about 1 GB.
"""

import argparse
import math

import numpy as np

from relhartree.analysis import verify_dispersive
from relhartree.dynamics import safe_horizon
from relhartree.harness import dispersive_datum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--extent", type=float, default=512.0)
    ap.add_argument("--width", type=float, default=0.5)
    ap.add_argument("--t-max", type=float, default=180.0)
    ap.add_argument("--N", type=int, nargs="*", default=[1, 2, 4])
    args = ap.parse_args()
    datum = dispersive_datum(args.n, args.extent, args.width)
    t_safe = safe_horizon(args.extent, args.width * math.sqrt(math.log(1e4)))
    t = np.unique(np.round(np.geomspace(1, args.t_max, 40), 2))
    s = verify_dispersive(args.N, t, datum, t_safe=t_safe)
    sup = s.details["sup"]
    lt = np.log(t)
    print(f"t_safe {t_safe:.1f}; local slope d log sup / d log t over sliding 8-point windows")
    print(f"{'t':>8} " + " ".join(f"{'N=' + str(N):>8}" for N in args.N))
    for i in range(0, t.size - 7, 4):
        row = [np.polyfit(lt[i : i + 8], np.log(sup[N][i : i + 8]), 1)[0] for N in args.N]
        print(f"{t[i + 4]:8.1f} " + " ".join(f"{r:8.3f}" for r in row))


if __name__ == "__main__":
    main()
