"""Serialisation of solver results to csv, json and text."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Sequence

from .feedforward import FeedForwardReport, ReferenceMatch, TableRow
from .solver import GateSolution, ScanEntry

FORMATS = ("csv", "json", "text")
DELTA_COLUMNS = ("delta_eta2", "delta_eta3", "delta_P")


def solution_record(sequence: str, sol: GateSolution | None, width: int, rank: int | None) -> dict[str, Any]:
    rec: dict[str, Any] = {"sequence": sequence}
    etas = sol.etas if sol is not None else ()
    for i in range(width):
        rec[f"eta{i + 1}"] = etas[i] if i < len(etas) else None
    rec["P"] = sol.probability if sol is not None else None
    rec["residual_norm"] = sol.residual_norm if sol is not None else None
    rec["solution_class"] = rank if sol is not None else None
    return rec


def solve_records(solutions: Sequence[GateSolution]) -> list[dict[str, Any]]:
    width = max((len(s.sequence) for s in solutions), default=0)
    return [
        {**solution_record(str(s.sequence), s, width, i + 1), "class_size": s.class_size}
        for i, s in enumerate(solutions)
    ]


def scan_records(entries: Sequence[ScanEntry]) -> list[dict[str, Any]]:
    width = max((len(e.sequence) for e in entries), default=0)
    return [
        {
            **solution_record(str(e.sequence), e.best, width, 1),
            "equivalent": [str(s) for s in e.equivalents],
        }
        for e in entries
    ]


def table_records(rows: Sequence[TableRow]) -> list[dict[str, Any]]:
    return [
        {**solution_record(str(r.problem.chain), r.solution, 3, r.rank), "n_classes": r.n_classes}
        for r in rows
    ]


def match_records(matches: Sequence[ReferenceMatch], eta_tol: float, p_tol: float) -> list[dict[str, Any]]:
    out = []
    for m in matches:
        ref = m.reference
        rec = solution_record(ref.sequence, m.row.solution if m.row else None, 3, m.row.rank if m.row else None)
        d = m.deltas
        for name, value in zip(DELTA_COLUMNS, d or (None, None, None)):
            rec[name] = value
        rec["within_tolerance"] = d is not None and max(abs(d[0]), abs(d[1])) <= eta_tol and abs(d[2]) <= p_tol
        out.append(rec)
    return out


def feedforward_records(reports: Sequence[FeedForwardReport]) -> list[dict[str, Any]]:
    out = []
    for r in reports:
        c = r.correction
        out.append(
            {
                "main_sequence": str(r.main.sequence),
                "main_etas": list(r.main.etas),
                "main_P": r.main.probability,
                "correction_sequence": str(c.sequence) if c else None,
                "correction_etas": list(c.etas) if c else None,
                "correction_P": c.probability if c else None,
                "total": r.total,
            }
        )
    return out


def _flat(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ";".join(str(_flat(v)) for v in value)
    return value


def to_csv(records: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_flat(rec.get(c)) for c in columns])
    return buf.getvalue()


def to_json(records: Any) -> str:
    return json.dumps(records, indent=2) + "\n"


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "(" + ", ".join(_fmt(v) for v in value) + ")"
    return str(value)


def to_text(records: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    rows = [[c for c in columns]] + [[_fmt(r.get(c)) for c in columns] for r in records]
    widths = [max(len(row[i]) for row in rows) for i in range(len(columns))]
    return "".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() + "\n" for row in rows)


def solution_columns(width: int) -> list[str]:
    return ["sequence"] + [f"eta{i + 1}" for i in range(width)] + ["P", "residual_norm", "solution_class"]


def render(records: Sequence[dict[str, Any]], fmt: str, csv_columns: Sequence[str], text_columns: Sequence[str] | None = None) -> str:
    if fmt == "json":
        return to_json(list(records))
    if fmt == "csv":
        return to_csv(records, csv_columns)
    return to_text(records, text_columns or csv_columns)
