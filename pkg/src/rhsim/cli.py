"""Command-line front end: run a sweep to CSV, or summarize an existing CSV."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, parse_config
from .harness import format_summary, read_csv, run_sweep, summarize, write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rhsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_cmd = sub.add_parser("run", help="run a Monte-Carlo sweep and write a CSV")
    run_cmd.add_argument("--config", required=True, help="path to the configuration file")
    run_cmd.add_argument("--out", default="results.csv", help="output CSV path (default results.csv)")
    run_cmd.add_argument("--seed", type=int, default=None, help="override the base seed")
    run_cmd.add_argument("--schemes", default=None, help="comma-separated scheme override")
    run_cmd.add_argument("--trials", type=int, default=None, help="override the trial count")
    run_cmd.add_argument("--quiet", action="store_true", help="suppress the summary printout")

    sum_cmd = sub.add_parser("summarize", help="print the per-scheme mean/stderr table for a CSV")
    sum_cmd.add_argument("--in", dest="input", required=True, help="input CSV path")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)

    try:
        if args.command == "run":
            with open(args.config, "r", encoding="utf-8") as handle:
                config = parse_config(handle.read())
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.trials is not None:
                overrides["trials"] = args.trials
            if args.schemes is not None:
                overrides["schemes"] = tuple(part.strip() for part in args.schemes.split(",") if part.strip())
            if overrides:
                config = dataclasses.replace(config, **overrides)
            result = run_sweep(config)
            write_csv(result, args.out)
            if not args.quiet:
                print(format_summary(summarize(result)))
                print(f"wrote {len(result)} rows to {args.out}")
            return 0

        table = summarize(read_csv(args.input))
        print(format_summary(table))
        return 0
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
