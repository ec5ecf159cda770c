"""Rendering of FMEA and risk-assessment reports.

FMEA csv columns, in this order: ``step, service, failure_mode, severity,
occurrence, detection, rpn`` (occurrence is the effective occurrence).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import List, Sequence

from .fmea import FmeaReport
from .matching import CapabilityResult, MatchResult
from .risk import RiskAssessmentReport

TABLE_TEXT = "table-text"
CSV = "csv"
STRUCTURED = "structured"
FORMATS = (TABLE_TEXT, CSV, STRUCTURED)

FMEA_COLUMNS = ("step", "service", "failure_mode", "severity", "occurrence", "detection", "rpn")


@dataclass(frozen=True)
class RenderedReport:
    format: str
    content: bytes

    @property
    def text(self) -> str:
        return self.content.decode("utf-8")


def _table(header: Sequence[str], rows: Sequence[Sequence], padded: int) -> List[str]:
    """Pipe-separated lines; only the first ``padded`` columns are aligned."""
    cells = [list(map(str, header))] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(padded)]
    lines = []
    for row in cells:
        parts = [c.ljust(widths[i]) if i < padded else c for i, c in enumerate(row)]
        lines.append(" | ".join(parts).rstrip())
    return lines


def _structured(data) -> bytes:
    return (json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode()


def _check(fmt: str):
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def render_fmea(report: FmeaReport, fmt: str = TABLE_TEXT) -> RenderedReport:
    _check(fmt)
    values = [
        (r.process_step_ref, r.equipment_service, r.failure_mode_ref,
         r.severity, r.effective_occurrence, r.detection, r.rpn)
        for r in report.rows
    ]
    if fmt == STRUCTURED:
        return RenderedReport(fmt, _structured(report.to_dict()))
    if fmt == CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FMEA_COLUMNS)
        writer.writerows(values)
        return RenderedReport(fmt, buf.getvalue().encode())
    lines = [f"FMEA for process {report.process_ref} (recipe {report.recipe_ref})"]
    lines += _table(("step", "service", "failure mode", "Sev", "Occ", "Det", "RPN"), values, 3)
    lines.append(f"max RPN: {report.max_rpn}")
    lines.append(f"sum RPN: {report.sum_rpn}")
    lines += [f"warning: {w}" for w in report.warnings]
    return RenderedReport(fmt, ("\n".join(lines) + "\n").encode())


def fmea_from_structured(content: bytes) -> FmeaReport:
    return FmeaReport.from_dict(json.loads(content))


def fmea_rows_from_csv(content: bytes) -> List[tuple]:
    reader = csv.reader(io.StringIO(content.decode("utf-8")))
    header = next(reader)
    if tuple(header) != FMEA_COLUMNS:
        raise ValueError(f"unexpected csv header {header}")
    return [(s, svc, fm, int(a), int(b), int(c), int(d)) for s, svc, fm, a, b, c, d in reader]


def render_risk(report: RiskAssessmentReport, fmt: str = TABLE_TEXT) -> RenderedReport:
    _check(fmt)
    values = [
        (r.hazard_ref, r.severity.value.upper(), r.frequency.value.upper(),
         r.avoidance.value.upper(), r.required_pl.value, r.covering_function_ref or "-",
         r.covering_pl.value if r.covering_pl else "-",
         "yes" if r.covered else f"no ({r.reason})")
        for r in report.rows
    ]
    if fmt == STRUCTURED:
        return RenderedReport(fmt, _structured(report.to_dict()))
    header = ("hazard", "S", "F", "P", "PLr", "safety function", "PL", "covered")
    if fmt == CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(values)
        return RenderedReport(fmt, buf.getvalue().encode())
    lines = [f"Risk assessment for process {report.process_ref} (recipe {report.recipe_ref})"]
    lines += _table(header, values, 7)
    lines.append(f"verdict: {report.verdict.value}")
    if report.uncovered_hazards:
        lines.append("uncovered hazards: " + ", ".join(report.uncovered_hazards))
    lines.append(f"approval: {report.approval_state.value}")
    lines.append(f"digest: {report.digest}")
    return RenderedReport(fmt, ("\n".join(lines) + "\n").encode())


def render_match(result: MatchResult) -> str:
    lines = [
        f"Match of recipe {result.recipe_ref} against process {result.process_ref}: "
        + ("feasible" if result.feasible else "infeasible")
    ]
    if result.feasible:
        lines += _table(
            ("recipe step", "process step"),
            [(m.recipe_step_ref, m.process_step_ref) for m in result.assignment],
            1,
        )
        lines.append("extra process steps: " + (", ".join(result.extra_process_steps) or "-"))
    lines += list(result.diagnostics)
    return "\n".join(lines) + "\n"


def render_comparison(ranked: Sequence[FmeaReport]) -> str:
    rows = [
        (rank, r.process_ref, r.max_rpn, r.sum_rpn) for rank, r in enumerate(ranked, start=1)
    ]
    recipe = ranked[0].recipe_ref if ranked else "-"
    lines = [f"Process ranking for recipe {recipe} (best first)"]
    lines += _table(("rank", "process", "max RPN", "sum RPN"), rows, 2)
    return "\n".join(lines) + "\n"


def render_capability(recipe_id: str, result: CapabilityResult) -> str:
    if not result.capable:
        return (
            f"Recipe {recipe_id}: not capable; no equipment service for steps "
            + ", ".join(result.missing_steps)
            + "\n"
        )
    witness = result.witness
    lines = [f"Recipe {recipe_id}: capable; witness process {witness.id}"]
    lines += _table(
        ("step", "recipe step", "equipment service"),
        [(s.id, s.recipe_step_ref, str(s.equipment_service)) for s in witness.steps],
        2,
    )
    return "\n".join(lines) + "\n"
