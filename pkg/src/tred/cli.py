"""Command line entry point: ``tred <experiment> [options]`` and ``tred fit-slope``.

Exit codes: 0 success, 2 configuration error, 3 numerical breakdown.
"""
import argparse
import json
import sys

from .exceptions import BreakdownError, ConfigError
from .experiments import EXPERIMENTS, config_from_dict, fit_order_slope, read_config_dict, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BREAKDOWN = 3


def _order_list(text):
    try:
        orders = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not orders:
        raise argparse.ArgumentTypeError("at least one order is required")
    return orders


def build_parser():
    parser = argparse.ArgumentParser(prog="tred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON configuration (flags override it)")
        p.add_argument("--order", type=_order_list, help="orders N, comma separated")
        p.add_argument("--terms", type=int, help="series terms K")
        p.add_argument("--tmax", type=float, help="time horizon")
        p.add_argument("--steps", type=int, help="integration steps / grid points")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="output directory")
        if name == "reduce":
            p.add_argument("--model", help="model JSON {n, m, L, R, J}")
    p = sub.add_parser("fit-slope", help="fit log-log error slopes of a CSV")
    p.add_argument("csv", help="CSV with a 't' column and err_poly_N* columns")
    p.add_argument("--tmin", type=float, default=2e-3)
    p.add_argument("--tmax", type=float, default=2e-1)
    p.add_argument("--floor", type=float, default=None,
                   help="ignore errors at or below this value (default: from manifest, else 1e-13)")
    p.add_argument("--out", help="write the fits as JSON to this file")
    return parser


def _config(args):
    data = read_config_dict(args.config) if args.config else {}
    overrides = {"orders": args.order, "series_terms": args.terms, "t_max": args.tmax,
                 "steps": args.steps, "seed": args.seed, "output_dir": args.out,
                 "model": getattr(args, "model", None)}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data, args.command)


def _fit_slope(args):
    try:
        fits = fit_order_slope(args.csv, (args.tmin, args.tmax), args.floor)
    except (OSError, ValueError) as exc:
        print(f"tred fit-slope: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in fits:
        if f.skipped:
            print(f"{f.column}: skipped ({f.skipped})")
        else:
            print(f"{f.column}: p = {f.slope:.4f} [{f.lower:.4f}, {f.upper:.4f}] "
                  f"from {f.n_points} points")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([f._asdict() for f in fits], fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "fit-slope":
        return _fit_slope(args)
    try:
        cfg = _config(args)
        result = run(cfg)
    except ConfigError as exc:
        print(f"tred {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BreakdownError as exc:
        print(f"tred {args.command}: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    for name in result.files:
        print(result.output_dir / name)
    if result.status == "breakdown":
        b = result.manifest["breakdown"]
        print(f"tred {args.command}: oracle breakdown at t={b['t']!r} "
              f"(condition number {b['cond']:.3e}); partial results kept", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
