"""Command-line front end.

Exit status: 0 trace found (or verified), 1 no trace up to k_max (or a
stored trace failed verification), 2 specification or usage error,
3 budget exceeded. Diagnostics go to stderr with a machine-readable
prefix: ``spec-error:``, ``unsat:``, ``budget:``, ``verify-fail:``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .calculus import CalculusError
from .emit import FORMATS, TraceFormatError, render, trace_from_json
from .engine import SimulationBudgetExceeded, Unsat, simulate, verify_trace
from .problem import ProblemError
from .specfile import BUNDLED_SPECS, SpecError, load_spec

EXIT_OK, EXIT_UNSAT, EXIT_SPEC, EXIT_BUDGET = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qsim",
        description="Qualitative spatial simulation by constraint solving over lasso paths.",
    )
    p.add_argument("--spec", required=True,
                   help=f"spec file, or a bundled spec: {', '.join(BUNDLED_SPECS)}")
    p.add_argument("--k-min", type=int, help="smallest bound tried (default 1)")
    p.add_argument("--k-max", type=int, help="largest bound tried (default 30)")
    p.add_argument("--translation", choices=("unravel", "array"),
                   help="formula translation (default unravel)")
    p.add_argument("--heuristic", metavar="first-fail|subclass:FILE",
                   help="domain splitting strategy (default first-fail)")
    p.add_argument("--allow-finite-path", action="store_true",
                   help="also accept paths without a loop")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", type=Path, help="write the trace here instead of stdout")
    p.add_argument("--seed", type=int, help="randomize tie-breaking among equal variables")
    p.add_argument("--node-limit", type=int, help="search node budget over all bounds")
    p.add_argument("--time-limit", type=float, help="wall-clock budget in seconds over all bounds")
    p.add_argument("--verify-only", metavar="TRACE", type=Path,
                   help="check a stored JSON trace against the problem instead of solving")
    p.add_argument("--version", action="version", version=f"qsim {__version__}")
    return p


def _overrides(args: argparse.Namespace) -> dict:
    out: dict = {}
    for flag, key in (("k_min", "k_min"), ("k_max", "k_max"), ("translation", "translation"),
                      ("heuristic", "heuristic"), ("seed", "seed"), ("node_limit", "node_limit"),
                      ("time_limit", "time_limit")):
        val = getattr(args, flag)
        if val is not None:
            out[key] = val
    if args.allow_finite_path:
        out["allow_finite"] = True
    return out


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        problem = load_spec(args.spec)
        changes = _overrides(args)
        if changes:
            problem = problem.with_options(**changes)
    except (SpecError, ProblemError, CalculusError) as exc:
        print(f"spec-error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    if args.verify_only is not None:
        return _verify_only(problem, args)

    try:
        result = simulate(problem)
    except ProblemError as exc:
        print(f"spec-error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except SimulationBudgetExceeded as exc:
        print(f"budget: {exc.what} budget exceeded at k={exc.k} "
              f"after {exc.stats['nodes']} nodes", file=sys.stderr)
        return EXIT_BUDGET
    if isinstance(result, Unsat):
        print(f"unsat: no lasso with k <= {result.k_max} "
              f"(searched {result.stats['nodes']} nodes)", file=sys.stderr)
        return EXIT_UNSAT
    _write(render(result, problem, args.format), args.out)
    return EXIT_OK


def _verify_only(problem, args: argparse.Namespace) -> int:
    try:
        text = args.verify_only.read_text()
    except OSError as exc:
        print(f"spec-error: cannot read trace {args.verify_only}: {exc.strerror}", file=sys.stderr)
        return EXIT_SPEC
    try:
        trace = trace_from_json(text, problem)
    except TraceFormatError as exc:
        print(f"spec-error: {args.verify_only}: {exc}", file=sys.stderr)
        return EXIT_SPEC
    verdict = verify_trace(problem, trace)
    report = verdict.report() + f"\nverdict: {'pass' if verdict.passed else 'fail'}\n"
    _write(report, args.out)
    if not verdict.passed:
        for c in verdict.failures:
            print(f"verify-fail: {c.name}: {c.detail}", file=sys.stderr)
        return EXIT_UNSAT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
