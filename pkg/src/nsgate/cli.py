"""Command-line entry point: ``nsgate <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import report
from .checks import closed_form_suite, expm_suite, unitarity_suite
from .errors import NSGateError, SequenceParseError
from .feedforward import feedforward_reports, match_reference, table1_report
from .fock import PHOTON_CAP
from .sequence import SequenceSpec
from .solver import SolverConfig, scan_sequences, solve_ns

log = logging.getLogger("nsgate")

TABLE_ETA_TOL = 1e-3
TABLE_P_TOL = 5e-4


def _grid(text: str) -> int:
    value = int(text)
    if value < 5:
        raise argparse.ArgumentTypeError(f"grid must be >= 5, got {value}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be > 0, got {text}")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_grid, default=41, help="seeds per amplitude axis (>= 5)")
    common.add_argument("--tol", type=_positive, default=1e-10, help="Newton residual tolerance")
    common.add_argument("--format", choices=report.FORMATS, default="text")
    common.add_argument("--photon-cap", type=_count, default=PHOTON_CAP)
    common.add_argument("--workers", type=_count, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nsgate", description="Nonlinear sign gates from concatenated beam splitters.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify-oracle", parents=[common], help="closed-form, unitarity and expm checks")

    p = sub.add_parser("solve", parents=[common], help="all NS solutions of one sequence")
    p.add_argument("--sequence", required=True, help='e.g. "(1,1),(0,0)"')

    p = sub.add_parser("scan", parents=[common], help="ranked table of all sequences")
    p.add_argument("--max-k", type=int, default=4, choices=range(5), metavar="{0..4}")
    p.add_argument("--length", type=int, default=2, choices=(2, 3))

    p = sub.add_parser("table1", parents=[common], help="three-splitter correction table")
    p.add_argument("--all", action="store_true", help="print every appreciable solution, not only reference matches")
    p.add_argument("--strict", action="store_true", help="exit 1 when a reference row is out of tolerance")

    sub.add_parser("feedforward", parents=[common], help="main gate plus best correction")
    return parser


def _config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(grid=args.grid, tol=args.tol, photon_cap=args.photon_cap)


def _verify(args: argparse.Namespace) -> tuple[str, int]:
    results = closed_form_suite() + [unitarity_suite(), expm_suite()]
    records = [
        {"suite": r.name, "passed": r.passed, "failed": r.failed, "worst_error": r.worst, "ok": r.ok}
        for r in results
    ]
    for r in results:
        for what in r.failures[:3]:
            log.info("%s: %s", r.name, what)
    cols = ["suite", "passed", "failed", "worst_error", "ok"]
    return report.render(records, args.format, cols), 0 if all(r.ok for r in results) else 1


def _solve(args: argparse.Namespace) -> tuple[str, int]:
    seq = SequenceSpec.parse(args.sequence)
    sols = solve_ns(seq, _config(args))
    if not sols and args.format == "text":
        return f"{seq}: no NS solution\n", 0
    cols = report.solution_columns(len(seq))
    return report.render(report.solve_records(sols), args.format, cols, cols + ["class_size"]), 0


def _scan(args: argparse.Namespace) -> tuple[str, int]:
    entries = scan_sequences(args.max_k, args.length, _config(args), args.workers)
    cols = report.solution_columns(args.length)
    return report.render(report.scan_records(entries), args.format, cols, cols + ["equivalent"]), 0


def _table1(args: argparse.Namespace) -> tuple[str, int]:
    rows = table1_report(_config(args), args.workers)
    if args.all:
        cols = report.solution_columns(3)
        return report.render(report.table_records(rows), args.format, cols, cols + ["n_classes"]), 0
    records = report.match_records(match_reference(rows), TABLE_ETA_TOL, TABLE_P_TOL)
    bad = [r["sequence"] for r in records if not r["within_tolerance"]]
    for rec in records:
        if not rec["within_tolerance"]:
            log.warning("reference row %s at eta1=%.4f is out of tolerance", rec["sequence"], rec["eta1"])
    cols = report.solution_columns(3) + list(report.DELTA_COLUMNS) + ["within_tolerance"]
    return report.render(records, args.format, cols), 1 if (bad and args.strict) else 0


def _feedforward(args: argparse.Namespace) -> tuple[str, int]:
    records = report.feedforward_records(feedforward_reports(_config(args)))
    cols = ["main_sequence", "main_etas", "main_P", "correction_sequence", "correction_etas", "correction_P", "total"]
    return report.render(records, args.format, cols), 0


COMMANDS = {
    "verify-oracle": _verify,
    "solve": _solve,
    "scan": _scan,
    "table1": _table1,
    "feedforward": _feedforward,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        text, status = COMMANDS[args.command](args)
    except SequenceParseError as exc:
        print(f"nsgate: invalid sequence {args.sequence!r}: {exc}", file=sys.stderr)
        return 2
    except (NSGateError, ValueError) as exc:
        print(f"nsgate: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
