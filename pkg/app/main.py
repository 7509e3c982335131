"""
Command-line interface for the elastica knot library.

Exit codes: 0 success, 1 other library error, 2 domain error or invalid
arguments, 3 closure failure, 4 failed equivalence gate.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.config import settings
from app.errors import ClosureError, DomainError, ElasticaError
from app.export import fmt, knot_metadata, render_curve, sweep_csv, sweep_json, write_text
from app.models import Branch, Chart, KnotSolution, RunConfig
from app.service import (
    build_pair,
    constants,
    run_sweep,
    solve_knot,
    sweep_metadata,
    verify_pair,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DOMAIN = 2
EXIT_CLOSURE = 3
EXIT_EQUIVALENCE = 4

SUMMARY_FIELDS = [
    "m",
    "q0",
    "lambda",
    "nu",
    "F_hat",
    "tau_avg",
    "T_total",
    "R_hat",
    "delta_theta",
    "ell",
    "closure_error",
    "vertical_drift",
]


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _emit(data: dict, as_json: bool) -> None:
    """Machine-readable JSON or an aligned name/value table on stdout."""
    if as_json:
        print(json.dumps(data, indent=2, default=str))
        return
    width = max(len(key) for key in data)
    for key, value in data.items():
        numeric = isinstance(value, float | int) and not isinstance(value, bool)
        print(f"{key:<{width}}  {fmt(value) if numeric else value}")


def knot_summary(knot: KnotSolution) -> dict:
    metadata = knot_metadata(knot)
    return {key: metadata[key] for key in SUMMARY_FIELDS}


def _curve_path(out: str, suffix: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix}")


def cmd_solve(config: RunConfig) -> int:
    knot = solve_knot(config)
    if config.out:
        write_text(Path(config.out), render_curve(knot, config.format))
    _emit(knot_summary(knot), config.json_summary)
    if knot.ell is not None and knot.closure_error is not None:
        if knot.closure_error > settings.closure_tolerance:
            print(
                f"error: curve misses closure after {knot.ell} periods by "
                f"{knot.closure_error:.3e} R",
                file=sys.stderr,
            )
            return EXIT_CLOSURE
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    result = asyncio.run(run_sweep(config))
    metadata = {"rows": len(result.rows), "failed": result.failed, **sweep_metadata(config)}
    writer = sweep_json if config.format == "json" else sweep_csv
    text = writer(result.rows, metadata)
    if config.out:
        write_text(Path(config.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_pair(config: RunConfig) -> int:
    pair, report = build_pair(config)
    if config.out:
        write_text(_curve_path(config.out, "minus"), render_curve(pair.knot_minus, config.format))
        write_text(_curve_path(config.out, "plus"), render_curve(pair.knot_plus, config.format))
    _emit(
        {
            "m_minus": report.m_minus,
            "m_plus": report.m_plus,
            "involution_gap": report.involution_gap,
            **{f"gap_{name}": gap for name, gap in report.gaps.items()},
            "tolerance": report.tolerance,
            "passed": report.passed,
        },
        config.json_summary,
    )
    return EXIT_OK if report.passed else EXIT_EQUIVALENCE


def cmd_verify(config: RunConfig) -> int:
    report, invariants, knot = verify_pair(config)
    data: dict = {}
    if report is not None:
        data.update(
            {
                "m_minus": report.m_minus,
                "m_plus": report.m_plus,
                "involution_gap": report.involution_gap,
                **{f"gap_{name}": gap for name, gap in report.gaps.items()},
                "equivalence_passed": report.passed,
            }
        )
    if invariants is not None:
        data["knot_m"] = knot.m
        data.update(invariants.model_dump())
        data["invariants_passed"] = invariants.passed()
    _emit(data, config.json_summary)
    if report is not None and not report.passed:
        return EXIT_EQUIVALENCE
    if invariants is not None and not invariants.passed():
        return EXIT_CLOSURE
    return EXIT_OK


def cmd_constants(config: RunConfig) -> int:
    values = constants()
    if config.json_summary:
        print(json.dumps([v.model_dump() for v in values], indent=2))
    else:
        for v in values:
            print(f"{v.name:<16}{fmt(v.value):<26}{v.provenance}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "pair": cmd_pair,
    "verify": cmd_verify,
    "constants": cmd_constants,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=float, help="Langer-Singer modulus")
    common.add_argument("--q0", type=float, help="Scale parameter (defaults to Q0(m))")
    common.add_argument("--k0", type=float, default=settings.k0, help="Initial curvature")
    common.add_argument("--p", type=int, help="Closure numerator p")
    common.add_argument("--q", type=int, help="Closure denominator q")
    common.add_argument(
        "--branch", choices=[b.value for b in Branch], default=Branch.CLASSICAL.value
    )
    common.add_argument(
        "--chart",
        choices=[c.value for c in Chart],
        default=Chart.MODULUS.value,
        help="Sweep table: modulus chart, roots against lambda, or constant-q0 lines",
    )
    common.add_argument("--nu", type=float, help="Fixed nu of a roots table")
    common.add_argument("--lam-min", type=float, help="Lower end of a roots table")
    common.add_argument("--lam-max", type=float, help="Upper end of a roots table")
    common.add_argument("--target-f", type=float, help="Target curvature functional")
    common.add_argument("--m-min", type=float, help="Lower end of a sweep")
    common.add_argument("--m-max", type=float, help="Upper end of a sweep")
    common.add_argument("--points", type=int, default=101, help="Sweep grid size")
    common.add_argument(
        "--samples", type=int, default=settings.samples_per_period, help="Samples per period"
    )
    common.add_argument("--tol-root", type=float, default=settings.root_tolerance)
    common.add_argument("--tol-equiv", type=float, default=settings.equivalence_tolerance)
    common.add_argument(
        "--no-closure", action="store_true", help="Allow q0 != Q0(m) (open curves)"
    )
    common.add_argument("--format", choices=["csv", "json", "obj"], default="csv")
    common.add_argument("--json", action="store_true", help="JSON summary on stdout")
    common.add_argument("--out", help="Output path")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="elastica",
        description="Closed elastica knots from elliptic-function solutions",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    subparsers.add_parser("solve", parents=[common], help="Solve and export one knot")
    subparsers.add_parser(
        "sweep", parents=[common], help="Tabulate the modulus chart or a physical chart"
    )
    subparsers.add_parser("pair", parents=[common], help="Equivalent pair for a functional")
    subparsers.add_parser("verify", parents=[common], help="Equivalence and invariant checks")
    subparsers.add_parser("constants", parents=[common], help="Print chart constants")
    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        m=args.m,
        q0=args.q0,
        k0=args.k0,
        p=args.p,
        q=args.q,
        branch=Branch(args.branch),
        chart=Chart(args.chart),
        nu=args.nu,
        lam_min=args.lam_min,
        lam_max=args.lam_max,
        target_f=args.target_f,
        m_min=args.m_min,
        m_max=args.m_max,
        points=args.points,
        samples=args.samples,
        tol_root=args.tol_root,
        tol_equiv=args.tol_equiv,
        closure=not args.no_closure,
        format=args.format,
        json_summary=args.json,
        out=args.out,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_OK
    configure_logging(args.verbose)

    try:
        config = to_config(args)
    except ValidationError as e:
        print(f"error: invalid arguments: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        return COMMANDS[config.command](config)
    except ValidationError as e:
        logger.error(f"{config.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as e:
        logger.error(f"{config.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except ClosureError as e:
        logger.error(f"{config.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CLOSURE
    except ElasticaError as e:
        logger.error(f"{config.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
