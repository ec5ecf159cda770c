"""Process-FMEA generation and RPN-based process ranking.

Severity comes from the recipe step, occurrence from the equipment failure
mode, and detection (plus an optional decreased occurrence) from quality
measures that are active in the process. Uncovered failure modes are scored
with detection 5.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .errors import InfeasibleMatchError, MixedRecipeError, ModelInconsistencyError, UnratedFailureModeError
from .matching import match_recipe
from .model import (
    CoverageMode,
    ModelRepository,
    Process,
    ProcessStep,
    QualityMeasureCoverage,
    Recipe,
)

WORST_SCORE = 5

STRICT = "strict"
LENIENT = "lenient"


@dataclass(frozen=True)
class FmeaRow:
    process_step_ref: str
    recipe_step_ref: str
    equipment_service: str
    service_ref: str
    failure_mode_ref: str
    severity: int
    base_occurrence: int
    effective_occurrence: int
    detection: int
    rpn: int
    applied_coverage: Optional[Tuple[str, str]] = None  # (provider, mode)


@dataclass(frozen=True)
class FmeaReport:
    process_ref: str
    recipe_ref: str
    rows: Tuple[FmeaRow, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def max_rpn(self) -> int:
        return max((r.rpn for r in self.rows), default=0)

    @property
    def sum_rpn(self) -> int:
        return sum(r.rpn for r in self.rows)

    def to_dict(self) -> dict:
        rows = []
        for row in self.rows:
            d = asdict(row)
            d["applied_coverage"] = list(row.applied_coverage) if row.applied_coverage else None
            rows.append(d)
        return {
            "process": self.process_ref,
            "recipe": self.recipe_ref,
            "rows": rows,
            "max_rpn": self.max_rpn,
            "sum_rpn": self.sum_rpn,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FmeaReport":
        rows = []
        for d in data["rows"]:
            d = dict(d)
            cov = d.pop("applied_coverage", None)
            rows.append(FmeaRow(**d, applied_coverage=tuple(cov) if cov else None))
        return cls(data["process"], data["recipe"], tuple(rows), tuple(data.get("warnings", ())))


class Factors(NamedTuple):
    effective_occurrence: int
    detection: int
    applied_coverage: Optional[QualityMeasureCoverage]


def _step_service(repository: ModelRepository, step: ProcessStep):
    es = repository.equipment_service(step.equipment_service)
    if es is None:
        raise ModelInconsistencyError(f"unknown equipment service {step.equipment_service}")
    return es


def candidate_coverages(step: ProcessStep, failure_mode_ref: str, repository: ModelRepository):
    """Coverages declared on the step's service or on a provider for this failure mode."""
    own = _step_service(repository, step).quality_coverages
    found = {c for c in own if c.covered_failure_mode_ref == failure_mode_ref}
    for ref, es in repository.iter_equipment_services():
        for c in es.quality_coverages:
            if c.provider == ref and c.covered_failure_mode_ref == failure_mode_ref:
                found.add(c)
    return sorted(found, key=lambda c: c.sort_key)


def _is_active(coverage: QualityMeasureCoverage, position: int, process: Process) -> bool:
    provider_positions = [
        i for i, s in enumerate(process.steps) if s.equipment_service == coverage.provider
    ]
    if coverage.mode is CoverageMode.DOWNSTREAM_STEP:
        return any(i >= position for i in provider_positions)
    # inline supervision runs alongside its equipment wherever that equipment works
    return bool(provider_positions) or any(
        s.equipment_service.equipment == coverage.provider.equipment for s in process.steps
    )


def active_coverages(
    step: ProcessStep, failure_mode_ref: str, process: Process, repository: ModelRepository
) -> List[QualityMeasureCoverage]:
    position = process.step_index(step.id)
    return [
        c for c in candidate_coverages(step, failure_mode_ref, repository)
        if _is_active(c, position, process)
    ]


def effective_factors(
    step: ProcessStep, failure_mode_ref: str, process: Process, repository: ModelRepository
) -> Factors:
    base = _step_service(repository, step).occurrence_of(failure_mode_ref)
    if base is None:
        raise ModelInconsistencyError(
            f"{step.equipment_service} declares no occurrence for {failure_mode_ref}"
        )
    active = active_coverages(step, failure_mode_ref, process, repository)
    occurrence = min(
        [base] + [c.decreased_occurrence for c in active if c.decreased_occurrence is not None]
    )
    applied = min(active, key=lambda c: (c.detection, c.sort_key), default=None)
    detection = min(WORST_SCORE, applied.detection) if applied else WORST_SCORE
    return Factors(occurrence, detection, applied)


def build_fmea(
    recipe: Recipe, process: Process, repository: ModelRepository, mode: str = STRICT
) -> FmeaReport:
    if mode not in (STRICT, LENIENT):
        raise ValueError(f"unknown mode {mode!r}")
    match = match_recipe(recipe, process, repository)
    if not match.feasible:
        raise InfeasibleMatchError(
            f"process {process.id} cannot implement recipe {recipe.id}", match.diagnostics
        )
    mapped = {m.process_step_ref: recipe.step(m.recipe_step_ref) for m in match.assignment}
    rows: List[FmeaRow] = []
    warnings: List[str] = []
    for step in process.steps:
        es = _step_service(repository, step)
        rs = mapped.get(step.id)
        if rs is None:
            for efm in es.failure_modes:
                warnings.append(
                    f"{step.id}: extra step, failure mode {efm.failure_mode_ref} "
                    f"(occurrence {efm.occurrence}) not assessed"
                )
            continue
        declared = {efm.failure_mode_ref for efm in es.failure_modes}
        for fid in sorted(set(rs.failure_mode_severities) - declared):
            warnings.append(
                f"{step.id}: recipe step {rs.id} rates {fid} but {step.equipment_service} "
                "declares no occurrence for it"
            )
        for efm in sorted(es.failure_modes, key=lambda m: m.failure_mode_ref):
            fid = efm.failure_mode_ref
            severity = rs.failure_mode_severities.get(fid)
            if severity is None:
                if mode == STRICT:
                    raise UnratedFailureModeError(step.id, fid)
                severity = WORST_SCORE
                warnings.append(
                    f"{step.id}: failure mode {fid} not rated by recipe step {rs.id}; "
                    f"severity {WORST_SCORE} assumed"
                )
            factors = effective_factors(step, fid, process, repository)
            cov = factors.applied_coverage
            rows.append(
                FmeaRow(
                    process_step_ref=step.id,
                    recipe_step_ref=rs.id,
                    equipment_service=str(step.equipment_service),
                    service_ref=es.service_ref,
                    failure_mode_ref=fid,
                    severity=severity,
                    base_occurrence=efm.occurrence,
                    effective_occurrence=factors.effective_occurrence,
                    detection=factors.detection,
                    rpn=severity * factors.effective_occurrence * factors.detection,
                    applied_coverage=(str(cov.provider), cov.mode.value) if cov else None,
                )
            )
    return FmeaReport(process.id, recipe.id, tuple(rows), tuple(warnings))


def compare_processes(reports: Sequence[FmeaReport]) -> List[FmeaReport]:
    """Rank reports by ascending (max RPN, summed RPN, process id)."""
    recipes = sorted({r.recipe_ref for r in reports})
    if len(recipes) > 1:
        raise MixedRecipeError("cannot rank processes of different recipes: " + ", ".join(recipes))
    return sorted(reports, key=lambda r: (r.max_rpn, r.sum_rpn, r.process_ref))
