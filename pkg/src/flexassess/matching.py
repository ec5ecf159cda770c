"""Recipe-to-process matching via abstract services and property constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import ModelInconsistencyError
from .model import (
    EquipmentService,
    Interval,
    ModelRepository,
    Process,
    ProcessStep,
    Recipe,
    RecipeStep,
)


class PropertyResult(NamedTuple):
    satisfied: bool
    reason: str = ""


@dataclass(frozen=True)
class StepMatch:
    recipe_step_ref: str
    process_step_ref: Optional[str]
    satisfied: bool
    per_property: Dict[str, PropertyResult] = field(default_factory=dict)
    reason: str = ""


@dataclass(frozen=True)
class MatchResult:
    recipe_ref: str
    process_ref: str
    feasible: bool
    assignment: Tuple[StepMatch, ...] = ()
    extra_process_steps: Tuple[str, ...] = ()
    diagnostics: Tuple[str, ...] = ()

    def mapped_step(self, process_step_id: str) -> Optional[str]:
        """Recipe step id mapped onto ``process_step_id``, if any."""
        for m in self.assignment:
            if m.process_step_ref == process_step_id:
                return m.recipe_step_ref
        return None


def _meets(required, value) -> bool:
    if isinstance(required, Interval):
        return required.contains(value)
    return required == value


def step_matches(
    recipe_step: RecipeStep,
    equipment_service: EquipmentService,
    property_values: Mapping,
    repository: Optional[ModelRepository] = None,
    process_step_ref: Optional[str] = None,
) -> StepMatch:
    """Check one recipe step against an equipment service and concrete values.

    Properties the equipment does not constrain are unbounded. With a
    repository, property ids unknown to the abstract service raise
    ModelInconsistencyError.
    """
    if recipe_step.service_ref != equipment_service.service_ref:
        return StepMatch(
            recipe_step.id,
            process_step_ref,
            False,
            reason=(
                f"service mismatch: requires {recipe_step.service_ref}, "
                f"provides {equipment_service.service_ref}"
            ),
        )
    if repository is not None:
        svc = repository.service(recipe_step.service_ref)
        if svc is None:
            raise ModelInconsistencyError(f"unknown service {recipe_step.service_ref}")
        known = {p.id for p in svc.properties}
        for pid in sorted(
            set(recipe_step.property_assignments)
            | set(equipment_service.property_constraints)
            | set(property_values)
        ):
            if pid not in known:
                raise ModelInconsistencyError(f"service {svc.id} has no property {pid}")

    results: Dict[str, PropertyResult] = {}
    for pid, required in sorted(recipe_step.property_assignments.items()):
        constraint = equipment_service.property_constraints.get(pid)
        value = property_values.get(pid)
        if value is None:
            results[pid] = PropertyResult(False, f"no concrete value for {pid}")
        elif constraint is not None and not constraint.contains(value):
            results[pid] = PropertyResult(
                False, f"{pid}: value {value} not in equipment constraint {constraint}"
            )
        elif constraint is not None and not constraint.contains(required):
            results[pid] = PropertyResult(
                False, f"{pid}: required {required} exceeds equipment constraint {constraint}"
            )
        elif not _meets(required, value):
            results[pid] = PropertyResult(False, f"{pid}: value {value} does not meet {required}")
        else:
            results[pid] = PropertyResult(True)
    failed = [r.reason for r in results.values() if not r.satisfied]
    return StepMatch(
        recipe_step.id, process_step_ref, not failed, results, "; ".join(failed)
    )


def _resolve(repository: ModelRepository, step: ProcessStep) -> EquipmentService:
    es = repository.equipment_service(step.equipment_service)
    if es is None:
        raise ModelInconsistencyError(f"unknown equipment service {step.equipment_service}")
    return es


def pair_match(recipe_step: RecipeStep, step: ProcessStep, repository: ModelRepository) -> StepMatch:
    """step_matches plus the process step's own declared recipe-step binding."""
    if step.recipe_step_ref is not None and step.recipe_step_ref != recipe_step.id:
        return StepMatch(
            recipe_step.id, step.id, False,
            reason=f"{step.id} is bound to recipe step {step.recipe_step_ref}",
        )
    return step_matches(
        recipe_step, _resolve(repository, step), step.property_values, repository, step.id
    )


def compatibility(recipe: Recipe, process: Process, repository: ModelRepository) -> List[List[bool]]:
    """``m[i][j]`` is True when recipe step i may be implemented by process step j."""
    return [
        [pair_match(rs, ps, repository).satisfied for ps in process.steps]
        for rs in recipe.steps
    ]


def greedy_leftmost(compat: Sequence[Sequence[bool]]) -> Tuple[Optional[List[int]], int]:
    """Earliest order-preserving injective mapping.

    Returns ``(indices, -1)`` on success or ``(None, i)`` where ``i`` is the
    first recipe step that could not be placed.
    """
    indices: List[int] = []
    j = 0
    for i, row in enumerate(compat):
        while j < len(row) and not row[j]:
            j += 1
        if j >= len(row):
            return None, i
        indices.append(j)
        j += 1
    return indices, -1


def match_recipe(recipe: Recipe, process: Process, repository: ModelRepository) -> MatchResult:
    if process.recipe_ref != recipe.id:
        raise ModelInconsistencyError(
            f"process {process.id} implements recipe {process.recipe_ref}, not {recipe.id}"
        )
    compat = compatibility(recipe, process, repository)
    indices, failed_at = greedy_leftmost(compat)
    if indices is None:
        rs = recipe.steps[failed_at]
        candidates = [process.steps[j].id for j, ok in enumerate(compat[failed_at]) if ok]
        if candidates:
            detail = "its candidates " + ", ".join(candidates) + " all precede earlier mapped steps"
        else:
            detail = "no process step provides it"
        return MatchResult(
            recipe.id,
            process.id,
            False,
            diagnostics=(f"recipe step {rs.id} ({rs.service_ref}) cannot be matched: {detail}",),
        )
    assignment = tuple(
        pair_match(rs, process.steps[j], repository) for rs, j in zip(recipe.steps, indices)
    )
    used = set(indices)
    extra = tuple(s.id for j, s in enumerate(process.steps) if j not in used)
    return MatchResult(recipe.id, process.id, True, assignment, extra)


@dataclass(frozen=True)
class CapabilityResult:
    capable: bool
    witness: Optional[Process] = None
    missing_steps: Tuple[str, ...] = ()


def concrete_values(recipe_step: RecipeStep) -> Dict:
    return {
        pid: (a.midpoint if isinstance(a, Interval) else a)
        for pid, a in recipe_step.property_assignments.items()
    }


def can_manufacture(recipe: Recipe, repository: ModelRepository) -> CapabilityResult:
    """Decide whether the repository's equipment can implement ``recipe``.

    The witness takes, per step, the matching equipment service with the
    lowest summed failure-mode occurrence; ties go to the smaller
    (equipment id, service id).
    """
    steps: List[ProcessStep] = []
    missing: List[str] = []
    for n, rs in enumerate(recipe.steps, start=1):
        values = concrete_values(rs)
        best = None
        for ref, es in repository.iter_equipment_services():
            if not step_matches(rs, es, values, repository).satisfied:
                continue
            key = (sum(fm.occurrence for fm in es.failure_modes), ref.equipment, ref.service)
            if best is None or key < best[0]:
                best = (key, ref)
        if best is None:
            missing.append(rs.id)
            continue
        steps.append(ProcessStep(f"w{n}", best[1], values, rs.id))
    if missing:
        return CapabilityResult(False, None, tuple(missing))
    witness = Process(f"{recipe.id}-witness", recipe.id, tuple(steps))
    return CapabilityResult(True, witness)
