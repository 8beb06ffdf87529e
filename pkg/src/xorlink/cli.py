"""Command-line entry point.

    xorlink run <config.ini>      one run per scheme, results to CSV
    xorlink sweep <config.ini>    full sweep (axis x replicates x schemes)
    xorlink degree-table          print the coding-degree lookup table
    xorlink validate <config.ini> parse and check a config, no simulation

Exit codes: 0 success, 1 I/O or internal error, 2 invalid config.
"""

from __future__ import annotations

import argparse
import sys

from .degree import build_table
from .experiments import (
    ExperimentError,
    dump_experiment,
    load_experiment,
    run_experiment,
    write_csv,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="experiment file (INI)")
    p.add_argument("--output", "-o", help="override the output path from the config")
    p.add_argument(
        "--backend",
        choices=("auto", "kernel", "reference"),
        default="auto",
        help="simulation backend (default: auto)",
    )
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="parallel sweep workers (default: XORLINK_WORKERS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xorlink",
        description="Erasure-coding simulations under intermittent feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("run", help="run each scheme once at the base config"))
    _add_common(sub.add_parser("sweep", help="run the sweep declared in the config"))

    dt = sub.add_parser("degree-table", help="print the degree table as 'x y d' rows")
    dt.add_argument("--qmax", type=int, default=16, help="largest window size (default: 16)")

    val = sub.add_parser("validate", help="check a config file and echo its canonical form")
    val.add_argument("config", help="experiment file (INI)")

    return parser


def _cmd_simulate(args, mode: str) -> int:
    exp = load_experiment(args.config)
    rows = run_experiment(exp, mode, backend=args.backend, workers=args.workers)
    out = args.output or exp.output
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_degree_table(args) -> int:
    table = build_table(args.qmax)
    for (x, y), d in table.items():
        print(f"{x} {y} {d}")
    return 0


def _cmd_validate(args) -> int:
    exp = load_experiment(args.config)
    sys.stdout.write(dump_experiment(exp))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_simulate(args, "run")
        if args.command == "sweep":
            return _cmd_simulate(args, "sweep")
        if args.command == "degree-table":
            return _cmd_degree_table(args)
        if args.command == "validate":
            return _cmd_validate(args)
        raise AssertionError(args.command)
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
