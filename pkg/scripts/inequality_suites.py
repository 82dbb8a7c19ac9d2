"""Sampled checks of the null structure, multiplier derivatives and HLS bound."""

import argparse
import json

from relhartree.harness import verify_inequalities


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--hls-fields", type=int, default=100_000)
    ap.add_argument("--gamma", type=float, default=1.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    verdicts, extra = verify_inequalities(args.samples, args.seed, args.gamma, args.hls_fields, True)
    for v in verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}: {json.dumps(v.measured)}")


if __name__ == "__main__":
    main()
