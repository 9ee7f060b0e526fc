#!/usr/bin/env python3
"""
spinet - command-line entry point.

Subcommands: simulate, verify-tables, oracle-compare, dump-eigensystem.
Exit codes: 0 success, 1 validation error, 2 verification failure.
"""

import argparse
import json
import math
import sys
from typing import Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

load_dotenv()

from config import settings  # noqa: E402
from exceptions import (  # noqa: E402
    EXIT_OK,
    EXIT_VERIFICATION,
    SimulatorException,
    SweepSpecError,
    error_response,
)
from logger import logger  # noqa: E402
from models.params import read_model_file, validate_params  # noqa: E402
from models.results import GridAxis, SweepSpec  # noqa: E402

COLORS = {
    'OKGREEN': '\033[92m',
    'WARNING': '\033[93m',
    'FAIL': '\033[91m',
    'ENDC': '\033[0m',
}


def print_status(message: str, color: str = 'ENDC') -> None:
    """Status lines go to stderr; data goes to the output file or stdout."""
    print(f"{COLORS.get(color, '')}{message}{COLORS['ENDC']}", file=sys.stderr)


def _parse_axes(sweeps: Optional[List[str]], time_grid: Optional[str]) -> Dict[str, GridAxis]:
    axes: Dict[str, GridAxis] = {}
    for item in sweeps or []:
        name, sep, body = item.partition("=")
        if not sep or name not in ("t", "theta", "B0", "T"):
            raise SweepSpecError(f"bad --sweep '{item}', expected AXIS=START:STOP:COUNT with AXIS in t, theta, B0, T")
        axes[name] = _parse_grid(body, item)
    if time_grid:
        axes["t"] = _parse_grid(time_grid, time_grid)
    return axes


def _parse_grid(body: str, item: str) -> GridAxis:
    try:
        return GridAxis.parse(body)
    except ValueError as e:
        raise SweepSpecError(f"bad grid '{item}': {e}")


def _build_spec(args, observable: str) -> SweepSpec:
    try:
        return SweepSpec(
            observable=observable,
            axes=_parse_axes(args.sweep, args.time_grid),
            final_sector=args.final_sector,
            time_in_inverse_omega=args.time_in_inverse_omega,
            output_path=args.out,
            output_format=getattr(args, "format", "csv"),
            workers=args.workers or settings.SWEEP_WORKERS,
        )
    except ValueError as e:
        raise SweepSpecError(f"invalid sweep definition: {e}")


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as handle:
            handle.write(text)
        print_status(f"✅ wrote {path}", 'OKGREEN')
    else:
        sys.stdout.write(text)


# ==========================================
# SUBCOMMANDS
# ==========================================

def cmd_simulate(args) -> int:
    from services.sweep_runner import result_to_csv, result_to_json, run_sweep

    params = read_model_file(args.config)
    spec = _build_spec(args, args.observable)
    result = run_sweep(spec, params)
    text = result_to_json(result) if spec.output_format == "json" else result_to_csv(result)
    _emit(text, args.out)
    unreliable = sum(1 for r in result.rows if "perturbation_unreliable" in r["flags"])
    if unreliable:
        print_status(f"⚠️  {unreliable} rows flagged perturbation_unreliable", 'WARNING')
    return EXIT_OK


def cmd_verify_tables(args) -> int:
    from services.table_verifier import (
        STATUS_DISCREPANCY,
        has_failures,
        report_to_csv,
        verify_table1,
        verify_table2,
        verify_table3,
    )

    params = validate_params(read_model_file(args.config))
    thetas = np.linspace(0.0, math.pi, args.theta_count)
    times = _parse_grid(args.time_grid, args.time_grid).values() if args.time_grid else np.linspace(0.0, 1e-6, 11)
    rows = verify_table1(params) + verify_table2(params, thetas) + verify_table3(params, thetas, times)
    _emit(report_to_csv(rows, {"code_version": settings.APP_VERSION, "theta_count": args.theta_count}), args.out)

    flagged = [f"{r.table}:{r.entry}" for r in rows if r.status == STATUS_DISCREPANCY]
    if flagged:
        print_status(f"⚠️  printed entries differing from numeric values: {', '.join(flagged)}", 'WARNING')
    if has_failures(rows):
        print_status("❌ residual check failed", 'FAIL')
        return EXIT_VERIFICATION
    print_status("✅ all residuals within tolerance", 'OKGREEN')
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    from services.sweep_runner import oracle_compare, result_to_csv, result_to_json

    params = read_model_file(args.config)
    spec = _build_spec(args, args.observable)
    result = oracle_compare(spec, params, args.oracle_cutoff)
    text = result_to_json(result) if spec.output_format == "json" else result_to_csv(result)
    _emit(text, args.out)
    print_status(f"max relative error {result.metadata['max_rel_error']:.3g}", 'OKGREEN')
    return EXIT_OK


def cmd_dump_eigensystem(args) -> int:
    from services.sweep_runner import dump_eigensystem

    params = validate_params(read_model_file(args.config))
    _emit(dump_eigensystem(params), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Spin-dependent electron-transfer simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sweeps: bool = True):
        p.add_argument("--config", required=True, help="JSON model file")
        p.add_argument("--out", default=None, help="Output path (stdout when omitted)")
        if sweeps:
            p.add_argument("--sweep", action="append", metavar="AXIS=START:STOP:COUNT",
                           help="Grid axis t, theta, B0 or T (repeatable)")
            p.add_argument("--time-grid", default=None, metavar="START:STOP:COUNT",
                           help="Alias of --sweep t=...")
            p.add_argument("--final-sector", choices=("acceptor", "all"), default="acceptor")
            p.add_argument("--time-in-inverse-omega", action="store_true",
                           help="Time values are t*omega instead of seconds")
            p.add_argument("--workers", type=int, default=None)
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    simulate = sub.add_parser("simulate", help="Evaluate an observable over a grid")
    common(simulate)
    simulate.add_argument("--observable", required=True,
                          choices=("pt", "ps", "kt", "ks", "pts", "pts_max", "b0_scan"))
    simulate.set_defaults(handler=cmd_simulate)

    verify = sub.add_parser("verify-tables", help="Check the eigenstate and coefficient tables")
    common(verify, sweeps=False)
    verify.add_argument("--theta-count", type=int, default=33)
    verify.add_argument("--time-grid", default=None, metavar="START:STOP:COUNT")
    verify.set_defaults(handler=cmd_verify_tables)

    oracle = sub.add_parser("oracle-compare", help="Perturbative against exact evolution")
    common(oracle)
    oracle.add_argument("--observable", choices=("pt", "pts"), default="pt")
    oracle.add_argument("--oracle-cutoff", type=int, default=4)
    oracle.set_defaults(handler=cmd_oracle_compare)

    dump = sub.add_parser("dump-eigensystem", help="Write the 24 spin eigenpairs as CSV")
    common(dump, sweeps=False)
    dump.set_defaults(handler=cmd_dump_eigensystem)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SimulatorException as exc:
        logger.error(exc.message, extra={"error": exc.__class__.__name__, "details": exc.details})
        print(json.dumps(error_response(exc), default=str), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
