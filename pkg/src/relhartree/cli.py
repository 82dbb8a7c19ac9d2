"""``relhartree`` command line.

Exit codes: 0 success, 1 verdict failure, 2 configuration error,
3 numeric error or blow-up.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .config import load_config
from .errors import RelHartreeError, UsageError

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat dotted-key config file")
    p.add_argument("--out", metavar="DIR", help="output root (default $RELHARTREE_OUT or ./runs)")
    p.add_argument("--seed", type=_u64, default=0, metavar="U64")
    p.add_argument("--jobs", type=int, default=None, metavar="N", help="worker processes (default: CPU count)")
    p.add_argument("--quiet", action="store_true")


def _u64(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relhartree", description="Semi-relativistic Hartree experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "run the configured simulation and probes"),
        ("linear-decay", "lambda = 0 flow: sup-norm, nonlinear-term and LP decay fits"),
        ("scattering", "small-data run: W^{7,inf} decay and profile Cauchy rates"),
        ("verify", "sampled checks of the multiplier and convolution inequalities"),
    ):
        _common(sub.add_parser(name, help=help_))
    sw = sub.add_parser("sweep", help="cartesian sweep over sweep.* axes of a manifest")
    sw.add_argument("manifest", nargs="?", metavar="MANIFEST")
    _common(sw)
    pl = sub.add_parser("plot", help="log-log SVG of one channel of a run record")
    pl.add_argument("record", metavar="RECORD_DIR")
    pl.add_argument("channel")
    pl.add_argument("--svg", metavar="FILE", help="output file (default RECORD_DIR/plots/<channel>.svg)")
    _common(pl)
    return ap


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _report(args, rec: harness.RunRecord) -> None:
    _say(args, f"{rec.command}: {rec.directory}")
    for fname, fit in rec.fits.items():
        _say(args, f"  fit {fname}: exponent {fit.exponent:.4f} (r^2 {fit.r_squared:.4f}) on {fit.window}")
    for v in rec.verdicts:
        _say(args, f"  [{'PASS' if v.passed else 'FAIL'}] {v.name}: {v.measured} target {v.target}")


def _dispatch(args) -> int:
    if args.command == "plot":
        path = harness.plot_record(args.record, args.channel, args.svg)
        _say(args, str(path))
        return EXIT_OK
    if args.command == "sweep":
        src = args.manifest or args.config
        if not src:
            raise UsageError("sweep needs a manifest path")
        manifest = harness.load_manifest(src)
        out, rows = harness.run_sweep(manifest, args.seed, args.out, args.jobs)
        _say(args, f"sweep report: {out / 'report.csv'}")
        for r in rows:
            _say(args, "  " + ", ".join(f"{k}={v}" for k, v in r.items()))
        return EXIT_OK if all(r["passed"] for r in rows) else EXIT_VERDICT
    flat = load_config(args.config) if args.config else {}
    rec = harness.run_command(args.command, flat, args.seed, args.out)
    _report(args, rec)
    return EXIT_OK if rec.passed else EXIT_VERDICT


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _dispatch(args)
    except RelHartreeError as exc:
        print(f"relhartree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"relhartree: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
