"""Hazard risk assessment with the ISO 13849-1 risk graph and approval gating."""

from __future__ import annotations

import datetime as dt
import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import ApprovalRefusedError, ModelInconsistencyError, StaleReportError
from .model import (
    Avoidance,
    Hazard,
    HazardSeverity,
    ModelRepository,
    PerformanceLevel,
    Process,
    Recipe,
    SafetyFunction,
    TaskFrequency,
)
from .serialize import render_model

S1, S2 = HazardSeverity.S1, HazardSeverity.S2
F1, F2 = TaskFrequency.F1, TaskFrequency.F2
P1, P2 = Avoidance.P1, Avoidance.P2

# ISO 13849-1 Annex A risk graph (severity, frequency/exposure, avoidance) -> PLr
RISK_GRAPH: Dict[Tuple[HazardSeverity, TaskFrequency, Avoidance], PerformanceLevel] = {
    (S1, F1, P1): PerformanceLevel.A,
    (S1, F1, P2): PerformanceLevel.B,
    (S1, F2, P1): PerformanceLevel.B,
    (S1, F2, P2): PerformanceLevel.C,
    (S2, F1, P1): PerformanceLevel.C,
    (S2, F1, P2): PerformanceLevel.D,
    (S2, F2, P1): PerformanceLevel.D,
    (S2, F2, P2): PerformanceLevel.E,
}


def required_performance_level(
    severity: HazardSeverity, frequency: TaskFrequency, avoidance: Avoidance
) -> PerformanceLevel:
    return RISK_GRAPH[(severity, frequency, avoidance)]


class Verdict(enum.Enum):
    FULFILLED = "fulfilled"
    UNFULFILLED = "unfulfilled"


class ApprovalState(enum.Enum):
    PENDING = "pending"
    APPROVED = "approved"


@dataclass(frozen=True)
class HazardAssessmentRow:
    hazard_ref: str
    severity: HazardSeverity
    frequency: TaskFrequency
    avoidance: Avoidance
    required_pl: PerformanceLevel
    covering_function_ref: Optional[str] = None
    covering_pl: Optional[PerformanceLevel] = None
    applicable_function_refs: Tuple[str, ...] = ()
    reason: str = ""

    @property
    def covered(self) -> bool:
        return self.covering_function_ref is not None

    def to_dict(self) -> dict:
        return {
            "hazard": self.hazard_ref,
            "severity": self.severity.value,
            "frequency": self.frequency.value,
            "avoidance": self.avoidance.value,
            "required_pl": self.required_pl.value,
            "covered": self.covered,
            "covering_function": self.covering_function_ref,
            "covering_pl": self.covering_pl.value if self.covering_pl else None,
            "applicable_functions": list(self.applicable_function_refs),
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HazardAssessmentRow":
        return cls(
            hazard_ref=d["hazard"],
            severity=HazardSeverity(d["severity"]),
            frequency=TaskFrequency(d["frequency"]),
            avoidance=Avoidance(d["avoidance"]),
            required_pl=PerformanceLevel(d["required_pl"]),
            covering_function_ref=d.get("covering_function"),
            covering_pl=PerformanceLevel(d["covering_pl"]) if d.get("covering_pl") else None,
            applicable_function_refs=tuple(d.get("applicable_functions", ())),
            reason=d.get("reason", ""),
        )


@dataclass
class RiskAssessmentReport:
    process_ref: str
    recipe_ref: str
    rows: Tuple[HazardAssessmentRow, ...]
    model_digest: str
    approval_state: ApprovalState = ApprovalState.PENDING

    @property
    def uncovered_hazards(self) -> List[str]:
        return [r.hazard_ref for r in self.rows if not r.covered]

    @property
    def verdict(self) -> Verdict:
        return Verdict.UNFULFILLED if self.uncovered_hazards else Verdict.FULFILLED

    def content(self) -> dict:
        """Everything the digest binds; the approval state is excluded."""
        return {
            "process": self.process_ref,
            "recipe": self.recipe_ref,
            "model_digest": self.model_digest,
            "rows": [r.to_dict() for r in self.rows],
            "verdict": self.verdict.value,
            "uncovered_hazards": self.uncovered_hazards,
        }

    @property
    def digest(self) -> str:
        blob = json.dumps(self.content(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        d = self.content()
        d["approval_state"] = self.approval_state.value
        d["digest"] = self.digest
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RiskAssessmentReport":
        return cls(
            process_ref=d["process"],
            recipe_ref=d["recipe"],
            rows=tuple(HazardAssessmentRow.from_dict(r) for r in d["rows"]),
            model_digest=d["model_digest"],
            approval_state=ApprovalState(d.get("approval_state", "pending")),
        )


@dataclass(frozen=True)
class ProcessApproval:
    report_digest: str
    approver_id: str
    timestamp: dt.datetime
    process_ref: str = ""
    verdict: Verdict = Verdict.FULFILLED


def model_digest(repository: ModelRepository) -> str:
    return hashlib.sha256(render_model(repository).encode()).hexdigest()


def _speed_ok(hazard: Hazard, function: SafetyFunction) -> bool:
    limit = function.constraint.max_hazard_speed
    if limit is None or hazard.speed is None:
        return True
    # quantities in different units are not compared; the function does not apply
    return hazard.speed.unit == limit.unit and hazard.speed.value <= limit.value


def applicable_safety_functions(
    hazard: Hazard,
    process: Process,
    repository: ModelRepository,
    recipe: Optional[Recipe] = None,
) -> List[SafetyFunction]:
    if recipe is None:
        recipe = repository.recipe(process.recipe_ref)
    minimum = (
        recipe.safety_requirement.minimum_performance_level
        if recipe is not None and recipe.safety_requirement is not None
        else None
    )
    in_use = {s.equipment_service.equipment for s in process.steps}
    found = []
    for eq_id in sorted(in_use):
        eq = repository.equipment_by_id(eq_id)
        if eq is None:
            raise ModelInconsistencyError(f"unknown equipment {eq_id}")
        for sf in eq.safety_functions:
            c = sf.constraint
            if minimum is not None and sf.performance_level < minimum:
                continue
            if not any(t.covers(hazard.hazard_type) for t in sf.covered_hazard_types):
                continue
            if hazard.zone not in c.allowed_zones:
                continue
            if c.applicable_task_refs and hazard.interaction_task_ref not in c.applicable_task_refs:
                continue
            if not _speed_ok(hazard, sf):
                continue
            found.append(sf)
    return sorted(found, key=lambda sf: sf.id)


def assess_process(
    recipe: Recipe, process: Process, repository: ModelRepository
) -> RiskAssessmentReport:
    if process.recipe_ref != recipe.id:
        raise ModelInconsistencyError(
            f"process {process.id} implements recipe {process.recipe_ref}, not {recipe.id}"
        )
    rows = []
    for hazard in sorted(process.hazards, key=lambda h: h.id):
        task = process.task(hazard.interaction_task_ref)
        if task is None:
            raise ModelInconsistencyError(
                f"hazard {hazard.id}: interaction task {hazard.interaction_task_ref} "
                f"not in process {process.id}"
            )
        required = required_performance_level(hazard.severity, task.frequency, hazard.avoidance)
        functions = applicable_safety_functions(hazard, process, repository, recipe)
        sufficient = [sf for sf in functions if sf.performance_level >= required]
        best = min(sufficient, key=lambda sf: (sf.performance_level.rank, sf.id), default=None)
        if best is not None:
            reason = ""
        elif functions:
            levels = ", ".join(f"{sf.id} ({sf.performance_level})" for sf in functions)
            reason = f"no suitable safety function: {levels} below required {required}"
        else:
            reason = "no applicable safety function"
        rows.append(
            HazardAssessmentRow(
                hazard_ref=hazard.id,
                severity=hazard.severity,
                frequency=task.frequency,
                avoidance=hazard.avoidance,
                required_pl=required,
                covering_function_ref=best.id if best else None,
                covering_pl=best.performance_level if best else None,
                applicable_function_refs=tuple(sf.id for sf in functions),
                reason=reason,
            )
        )
    return RiskAssessmentReport(
        process.id, recipe.id, tuple(rows), model_digest(repository)
    )


def _utc(timestamp: dt.datetime) -> dt.datetime:
    if timestamp.tzinfo is None:
        return timestamp.replace(tzinfo=dt.timezone.utc)
    return timestamp.astimezone(dt.timezone.utc)


def approve(
    report: RiskAssessmentReport,
    approver_id: str,
    timestamp: Optional[dt.datetime] = None,
    repository: Optional[ModelRepository] = None,
    expected_digest: Optional[str] = None,
) -> ProcessApproval:
    """Record a manual approval of a fulfilled report.

    Pass the current ``repository`` to reject reports assessed against an
    older model, and ``expected_digest`` to reject reports edited after the
    reviewer saw them.
    """
    if report.verdict is not Verdict.FULFILLED:
        raise ApprovalRefusedError(report.process_ref, report.uncovered_hazards)
    if repository is not None and model_digest(repository) != report.model_digest:
        raise StaleReportError(
            f"report for {report.process_ref} was assessed against a different model"
        )
    if expected_digest is not None and expected_digest != report.digest:
        raise StaleReportError(f"report for {report.process_ref} changed since review")
    if not approver_id or approver_id != approver_id.strip():
        raise ValueError("approver id must be non-empty text without surrounding whitespace")
    approval = ProcessApproval(
        report_digest=report.digest,
        approver_id=approver_id,
        timestamp=_utc(timestamp or dt.datetime.now(dt.timezone.utc)),
        process_ref=report.process_ref,
        verdict=report.verdict,
    )
    report.approval_state = ApprovalState.APPROVED
    return approval
