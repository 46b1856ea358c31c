"""Command-line entry point: pd-compare, ngg-compare, timing, validate.

Exit codes: 0 success (validate: every check passed), 1 a validation check
failed, 2 bad usage or configuration.
"""
from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .errors import DomainError


def _common(parser):
    parser.add_argument("--config", metavar="PATH", help="flat key = value file")
    parser.add_argument("--seed", type=int, help=f"unsigned 64-bit seed (default {ex.DEFAULT_SEED})")
    parser.add_argument("--m", type=int, dest="M", help="MC replicates per V estimate")
    parser.add_argument("--nmax", type=int, dest="n_max", help="largest sample size")
    parser.add_argument("--precision", type=int, dest="precision_digits",
                        help="decimal digits for the NGG series")
    parser.add_argument("--out", help="output directory (default ./results)")
    parser.add_argument("--no-plot", action="store_true", help="write CSVs only")
    parser.add_argument("--desk", action="store_true",
                        help=f"cap MC-heavy runs at n_max={ex.DESK_N_MAX}, M={ex.DESK_M}")
    parser.add_argument("--independent-data", action="store_true",
                        help="draw a separate data stream for every configuration")
    parser.add_argument("--jobs", type=int, help="configurations run concurrently")


def build_parser():
    parser = argparse.ArgumentParser(prog="gibbspred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("pd-compare", "exact PD weights against the approximations"),
                       ("ngg-compare", "MC NGG weights against the approximations"),
                       ("timing", "per-step MC running time")]:
        _common(sub.add_parser(name, help=text))
    validate = sub.add_parser("validate", help="cross-backend and sampler checks")
    validate.add_argument("--quick", action="store_true", help="reduced subset")
    validate.add_argument("--seed", type=int, default=ex.DEFAULT_SEED)
    return parser


def _config(args, family, mc_heavy):
    file_values = ex.read_config(args.config) if args.config else {}
    defaults = {}
    if family == "ngg" and "n_min" not in file_values:
        defaults["n_min"] = 50 if args.command == "ngg-compare" else 1
    if args.command == "timing" and "n_max" not in file_values:
        defaults["n_max"] = 200
    config = ex.make_config(
        family, {**defaults, **file_values}, seed=args.seed, M=args.M, n_max=args.n_max,
        precision_digits=args.precision_digits, out=args.out, jobs=args.jobs,
        plot=False if args.no_plot else None,
        independent_data=True if args.independent_data else None)
    if config.n_min > config.n_max:
        config.n_min = 1
    return ex.desk(config) if args.desk and mc_heavy else config


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return 0 if ex.cmd_validate(quick=args.quick, seed=args.seed) else 1
        if args.command == "pd-compare":
            paths = ex.cmd_pd_compare(_config(args, "pd", mc_heavy=False))
        elif args.command == "ngg-compare":
            paths = ex.cmd_ngg_compare(_config(args, "ngg", mc_heavy=True))
        else:
            paths = ex.cmd_timing(_config(args, "ngg", mc_heavy=True))
    except (DomainError, OSError, TypeError) as exc:
        print(f"gibbspred: error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
