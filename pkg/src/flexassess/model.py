"""Domain types for recipes, abstract services, equipment and processes.

All elements are frozen dataclasses. Collections that carry meaning through
their order (service properties, recipe steps, process steps) are tuples in
document order; everything else is kept sorted by id so that two documents
that differ only in declaration order load into equal repositories.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Tuple, Union

Scalar = Union[int, float, str]

SCORE_RANGE = range(1, 6)

DEFAULT_HAZARD_TAXONOMY = (
    ("mechanical", "bruising"),
    ("mechanical", "crushing"),
    ("mechanical", "shearing"),
    ("mechanical", "squeezing"),
)


class PropertyKind(enum.Enum):
    NUMERIC = "numeric"
    ENUMERATED = "enumerated"
    TEXT = "text"


@functools.total_ordering
class PerformanceLevel(enum.Enum):
    """Performance level a..e; ``e`` is the most demanding."""

    A = "a"
    B = "b"
    C = "c"
    D = "d"
    E = "e"

    @property
    def rank(self) -> int:
        return "abcde".index(self.value)

    def __lt__(self, other):
        if not isinstance(other, PerformanceLevel):
            return NotImplemented
        return self.rank < other.rank

    def __str__(self) -> str:
        return f"PL {self.value}"


class HazardSeverity(enum.Enum):
    S1 = "s1"  # slight, normally reversible injury
    S2 = "s2"  # serious, normally irreversible injury or death


class TaskFrequency(enum.Enum):
    F1 = "f1"  # low frequent
    F2 = "f2"  # high frequent


class Avoidance(enum.Enum):
    P1 = "p1"  # possible under specific conditions
    P2 = "p2"  # scarcely possible


class LifecyclePhase(enum.Enum):
    SETUP = "setup"
    PRODUCTION = "production"
    MAINTENANCE = "maintenance"


class CoverageMode(enum.Enum):
    DOWNSTREAM_STEP = "downstream-step"
    INLINE_SUPERVISION = "inline-supervision"


@dataclass(frozen=True)
class Interval:
    """Closed numeric interval ``[lo, hi]``."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        return self.lo <= value <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class AllowedSet:
    """Finite set of admissible (non-numeric) values."""

    values: frozenset

    @property
    def empty(self) -> bool:
        return not self.values

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return False
        return value in self.values

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(map(str, self.values))) + "}"


Constraint = Union[Interval, AllowedSet]
Assignment = Union[Scalar, Interval]


@dataclass(frozen=True)
class ServicePropertyDeclaration:
    id: str
    name: str
    kind: PropertyKind
    unit: str = ""
    bounds: Optional[Constraint] = None


@dataclass(frozen=True)
class FailureModeDeclaration:
    id: str
    name: str
    service_ref: str
    description: str = ""


@dataclass(frozen=True)
class ServiceDeclaration:
    id: str
    name: str
    properties: Tuple[ServicePropertyDeclaration, ...] = ()
    failure_modes: Tuple[FailureModeDeclaration, ...] = ()

    def property(self, property_id: str) -> Optional[ServicePropertyDeclaration]:
        for prop in self.properties:
            if prop.id == property_id:
                return prop
        return None


@dataclass(frozen=True)
class HazardType:
    path: Tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "HazardType":
        return cls(tuple(text.split("/")))

    def covers(self, other: "HazardType") -> bool:
        """True if ``other`` is this type or one of its sub-types."""
        return other.path[: len(self.path)] == self.path

    def __str__(self) -> str:
        return "/".join(self.path)


@dataclass(frozen=True)
class ProcessSafetyRequirement:
    minimum_performance_level: PerformanceLevel


@dataclass(frozen=True)
class RecipeStep:
    id: str
    service_ref: str
    property_assignments: Dict[str, Assignment] = field(default_factory=dict)
    failure_mode_severities: Dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Recipe:
    id: str
    name: str
    steps: Tuple[RecipeStep, ...]
    safety_requirement: Optional[ProcessSafetyRequirement] = None

    def step(self, step_id: str) -> Optional[RecipeStep]:
        return next((s for s in self.steps if s.id == step_id), None)


@dataclass(frozen=True, order=True)
class EquipmentServiceRef:
    equipment: str
    service: str

    def __str__(self) -> str:
        return f"{self.equipment}/{self.service}"


@dataclass(frozen=True)
class EquipmentFailureMode:
    failure_mode_ref: str
    occurrence: int


@dataclass(frozen=True)
class QualityMeasureCoverage:
    provider: EquipmentServiceRef
    covered_failure_mode_ref: str
    detection: int
    mode: CoverageMode = CoverageMode.DOWNSTREAM_STEP
    decreased_occurrence: Optional[int] = None

    @property
    def sort_key(self):
        return (
            self.provider,
            self.covered_failure_mode_ref,
            self.mode.value,
            self.detection,
            -1 if self.decreased_occurrence is None else self.decreased_occurrence,
        )


@dataclass(frozen=True)
class EquipmentService:
    id: str
    service_ref: str
    property_constraints: Dict[str, Constraint] = field(default_factory=dict)
    failure_modes: Tuple[EquipmentFailureMode, ...] = ()
    quality_coverages: Tuple[QualityMeasureCoverage, ...] = ()

    def occurrence_of(self, failure_mode_ref: str) -> Optional[int]:
        for fm in self.failure_modes:
            if fm.failure_mode_ref == failure_mode_ref:
                return fm.occurrence
        return None


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str

    def __str__(self) -> str:
        return f"{self.value} {self.unit}"


@dataclass(frozen=True)
class SafetyConstraint:
    allowed_zones: frozenset = frozenset()
    applicable_task_refs: frozenset = frozenset()  # empty: every task
    max_hazard_speed: Optional[Quantity] = None


@dataclass(frozen=True)
class SafetyFunction:
    id: str
    name: str
    performance_level: PerformanceLevel
    covered_hazard_types: frozenset  # of HazardType
    constraint: SafetyConstraint = SafetyConstraint()


@dataclass(frozen=True)
class Equipment:
    id: str
    name: str
    services: Tuple[EquipmentService, ...] = ()
    safety_functions: Tuple[SafetyFunction, ...] = ()

    def service(self, service_id: str) -> Optional[EquipmentService]:
        return next((s for s in self.services if s.id == service_id), None)


@dataclass(frozen=True)
class InteractionTask:
    id: str
    description: str
    frequency: TaskFrequency
    lifecycle_phase: LifecyclePhase


@dataclass(frozen=True)
class Hazard:
    id: str
    interaction_task_ref: str
    source_equipment_ref: str
    hazard_type: HazardType
    severity: HazardSeverity
    avoidance: Avoidance
    zone: str
    speed: Optional[Quantity] = None


@dataclass(frozen=True)
class ProcessStep:
    id: str
    equipment_service: EquipmentServiceRef
    property_values: Dict[str, Scalar] = field(default_factory=dict)
    recipe_step_ref: Optional[str] = None


@dataclass(frozen=True)
class Process:
    id: str
    recipe_ref: str
    steps: Tuple[ProcessStep, ...]
    interaction_tasks: Tuple[InteractionTask, ...] = ()
    hazards: Tuple[Hazard, ...] = ()

    def task(self, task_id: str) -> Optional[InteractionTask]:
        return next((t for t in self.interaction_tasks if t.id == task_id), None)

    def step_index(self, step_id: str) -> int:
        for i, step in enumerate(self.steps):
            if step.id == step_id:
                return i
        raise KeyError(step_id)


@dataclass(frozen=True)
class ModelRepository:
    """Container for every declaration of one model document."""

    services: Tuple[ServiceDeclaration, ...] = ()
    recipes: Tuple[Recipe, ...] = ()
    equipment: Tuple[Equipment, ...] = ()
    processes: Tuple[Process, ...] = ()
    hazard_taxonomy: Tuple[HazardType, ...] = tuple(
        HazardType(p) for p in DEFAULT_HAZARD_TAXONOMY
    )
    zones: Tuple[str, ...] = ()
    meta: Mapping = field(default_factory=dict, compare=False)

    @cached_property
    def service_index(self) -> Dict[str, ServiceDeclaration]:
        return {s.id: s for s in self.services}

    @cached_property
    def failure_mode_index(self) -> Dict[str, FailureModeDeclaration]:
        return {fm.id: fm for s in self.services for fm in s.failure_modes}

    @cached_property
    def recipe_index(self) -> Dict[str, Recipe]:
        return {r.id: r for r in self.recipes}

    @cached_property
    def equipment_index(self) -> Dict[str, Equipment]:
        return {e.id: e for e in self.equipment}

    @cached_property
    def process_index(self) -> Dict[str, Process]:
        return {p.id: p for p in self.processes}

    def service(self, service_id: str) -> Optional[ServiceDeclaration]:
        return self.service_index.get(service_id)

    def failure_mode(self, failure_mode_id: str) -> Optional[FailureModeDeclaration]:
        return self.failure_mode_index.get(failure_mode_id)

    def recipe(self, recipe_id: str) -> Optional[Recipe]:
        return self.recipe_index.get(recipe_id)

    def process(self, process_id: str) -> Optional[Process]:
        return self.process_index.get(process_id)

    def equipment_by_id(self, equipment_id: str) -> Optional[Equipment]:
        return self.equipment_index.get(equipment_id)

    def equipment_service(self, ref: EquipmentServiceRef) -> Optional[EquipmentService]:
        eq = self.equipment_index.get(ref.equipment)
        return eq.service(ref.service) if eq is not None else None

    def iter_equipment_services(self):
        for eq in self.equipment:
            for es in eq.services:
                yield EquipmentServiceRef(eq.id, es.id), es
