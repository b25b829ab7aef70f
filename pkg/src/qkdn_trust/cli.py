"""Command-line front end: ``qkdn run``, ``qkdn analyze`` and ``qkdn check``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Sequence

from .errors import AnalysisError, ConfigurationError
from .harness import REPORT_FORMATS, emit_report, run_scenario
from .scenario import Scenario, load_scenario

EXIT_OK, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2
SEED_ENV = "QKDN_SEED"


def _parse_seed(text: str, source: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ConfigurationError(f"{source} must be an integer, got {text!r}") from None


def effective_seed(scenario: Scenario, flag: str | None, env: dict[str, str] | None = None) -> Scenario:
    """Seed precedence, lowest first: scenario file, QKDN_SEED, --seed."""
    env = os.environ if env is None else env
    if flag is not None:
        return scenario.with_seed(_parse_seed(flag, "--seed"))
    if env.get(SEED_ENV):
        return scenario.with_seed(_parse_seed(env[SEED_ENV], SEED_ENV))
    return scenario


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {out}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdn", description="Simulate QKD-network key relay and grade node trust.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario", help="scenario file")
        p.add_argument("--seed", help=f"override the scenario seed (beats ${SEED_ENV})")
        p.add_argument("--format", choices=REPORT_FORMATS, default="json")
        p.add_argument("--out", help="write the report here instead of stdout")

    run = sub.add_parser("run", help="execute a scenario and print its report")
    common(run)
    analyze = sub.add_parser("analyze", help="execute a scenario and grade the given coalitions")
    common(analyze)
    analyze.add_argument("--coalition", action="append", required=True, metavar="N1,N2",
                         help="comma-separated node set; repeat for several")
    sub.add_parser("check", help="run the built-in invariant suite")
    return parser


def _run(args: argparse.Namespace) -> int:
    scenario = effective_seed(load_scenario(args.scenario), args.seed)
    if args.command == "analyze":
        names = {n for n, _ in scenario.topology.nodes}
        coalitions = []
        for text in args.coalition:
            members = tuple(m.strip() for m in text.split(",") if m.strip())
            unknown = [m for m in members if m not in names]
            if not members or unknown:
                raise ConfigurationError(f"unknown node(s) in coalition {text!r}: {', '.join(unknown) or 'empty'}")
            coalitions.append(members)
        scenario = replace(scenario, coalitions=tuple(coalitions))
    report = run_scenario(scenario)
    _write(emit_report(report, args.format), args.out)
    return EXIT_ABORT if report.aborted else EXIT_OK


def _check() -> int:
    from .checks import run_checks

    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}" + ("" if r.ok else f"  ({r.detail})"))
    return EXIT_OK if all(r.ok for r in results) else EXIT_ABORT


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return _check()
        return _run(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
