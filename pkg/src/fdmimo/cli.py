"""Command-line front end.

Subcommands:

    fdmimo run           execute a sweep scenario and emit the CSV
    fdmimo check         run the release acceptance suite
    fdmimo print-config  show the resolved configuration document

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
Progress and warnings go to standard error; data goes only to the file
named by --output (or to standard output with ``--output -``).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Sequence

from . import acceptance, experiments
from .channel import ConfigError

#: Published CSVs are not trustworthy below this many trials.
_TRIALS_WARN_FLOOR = 100


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fdmimo",
                     description="Full-duplex multi-antenna link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep scenario, emit CSV")
    run.add_argument("--scenario", choices=experiments.SCENARIO_NAMES,
                     help="named scenario (default: from config file, else "
                          "fig-perfect)")
    run.add_argument("--config", metavar="PATH",
                     help="key = value configuration file")
    run.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--modes", metavar="LIST",
                     help="comma-separated subset of "
                          + ",".join(experiments.MODE_TOKENS))
    run.add_argument("--output", default="-", metavar="PATH",
                     help="CSV destination, '-' for standard output (default)")

    check = sub.add_parser("check", help="run the acceptance suite")
    check.add_argument("--trials", type=int, default=10_000,
                       help="base trial count the criteria scale from "
                            "(default 10000)")
    check.add_argument("--seed", type=int, default=1, help="master seed")

    prt = sub.add_parser("print-config",
                         help="print the resolved configuration")
    prt.add_argument("--scenario", choices=experiments.SCENARIO_NAMES,
                     help="named scenario (default: from config file, else "
                          "fig-perfect)")
    prt.add_argument("--config", metavar="PATH",
                     help="key = value configuration file")
    return parser


def _resolve(args: argparse.Namespace):
    """Apply precedence defaults < config file < CLI flags."""
    if args.config is not None:
        config, scenario = experiments.load_config(args.config, args.scenario)
    else:
        name = args.scenario if args.scenario is not None else "fig-perfect"
        config = experiments.default_config()
        scenario = experiments.default_scenario(name)
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "modes", None) is not None:
        tokens = tuple(t.strip() for t in args.modes.split(",") if t.strip())
        overrides["modes"] = tokens
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
    return config, scenario


def _cmd_run(args: argparse.Namespace) -> int:
    config, scenario = _resolve(args)
    if scenario.trials < _TRIALS_WARN_FLOOR:
        print(f"warning: {scenario.trials} trials is below the "
              f"{_TRIALS_WARN_FLOOR}-trial floor for publishable CSVs",
              file=sys.stderr)
    rows: list[experiments.SweepRow] = []
    try:
        experiments.run_scenario(config, scenario,
                                 progress=lambda msg: print(msg,
                                                            file=sys.stderr),
                                 sink=rows)
    except Exception as exc:
        if rows:
            _emit(rows, args.output)
            print(f"error: aborted after {len(rows)} rows: {exc}",
                  file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(rows, args.output)
    return 0


def _emit(rows, output: str) -> None:
    if output == "-":
        experiments.emit_csv(rows, sys.stdout)
    else:
        experiments.emit_csv(rows, output)


def _cmd_check(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    results = acceptance.run_all(base_trials=args.trials, seed=args.seed,
                                 report=lambda line: print(line,
                                                           file=sys.stderr))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed",
          file=sys.stderr)
    return 0 if not failed else 2


def _cmd_print_config(args: argparse.Namespace) -> int:
    config, scenario = _resolve(args)
    sys.stdout.write(experiments.format_config(config, scenario))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_print_config(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
