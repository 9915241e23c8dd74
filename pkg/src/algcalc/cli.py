"""Command line entry point.

Exit codes: 0 every check passed, 1 some check failed, 2 bad input or usage.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from algcalc.problem import BUNDLED, DefinitionError, bundled_fixture, load_definition
from algcalc.runner import SelectionError, emit_report, run_checks

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _resolve(path: str) -> Path:
    # bare fixture names fall back to the bundled copies
    p = Path(path)
    if not p.exists() and p.name == path and path in BUNDLED:
        return bundled_fixture(path)
    return p


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algcalc",
                                     description="Exterior calculus and involutivity checks on Lie algebroids.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run checks on a definition file")
    check.add_argument("--input", required=True, help="definition file (JSON)")
    check.add_argument("--only", help="comma-separated check names, e.g. axioms,equivalence:contact")
    check.add_argument("--seed", type=_seed, default=0, help="seed for identity sampling (default 0)")
    check.add_argument("--samples", type=int, default=50, help="random inputs per calculus identity")
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--out", help="write the report here instead of stdout")

    val = sub.add_parser("validate", help="check schema and shapes only")
    val.add_argument("--input", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        defn = load_definition(_resolve(args.input))
    except (OSError, DefinitionError) as exc:
        print(f"algcalc: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "validate":
        A = defn.algebroid
        print(f"OK {args.input}: n={A.n} p={A.p} subbundles={list(defn.subbundles)} forms={list(defn.forms)}")
        return EXIT_PASS

    selection = None if args.only is None else args.only.split(",")
    try:
        report = run_checks(defn, selection, seed=args.seed, samples=args.samples)
    except SelectionError as exc:
        print(f"algcalc: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
