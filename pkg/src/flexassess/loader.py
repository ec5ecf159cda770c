"""Model document loading.

A model document is one JSON object::

    {"services": [...], "recipes": [...], "equipment": [...],
     "processes": [...], "hazard_taxonomy": [...], "zones": [...]}

Intervals are ``[lo, hi]`` arrays of two numbers; allowed-value sets are
arrays of strings; enum values are lowercase strings. ``hazard_taxonomy``
defaults to the four mechanical hazard types when omitted. An optional
``meta`` object is carried through untouched.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional, Union

from .errors import ModelSyntaxError, ModelValidationError, Violation
from .model import (
    AllowedSet,
    Avoidance,
    CoverageMode,
    Equipment,
    EquipmentFailureMode,
    EquipmentService,
    EquipmentServiceRef,
    FailureModeDeclaration,
    Hazard,
    HazardSeverity,
    HazardType,
    InteractionTask,
    Interval,
    LifecyclePhase,
    ModelRepository,
    PerformanceLevel,
    Process,
    ProcessSafetyRequirement,
    ProcessStep,
    PropertyKind,
    QualityMeasureCoverage,
    Quantity,
    Recipe,
    RecipeStep,
    SafetyConstraint,
    SafetyFunction,
    ServiceDeclaration,
    ServicePropertyDeclaration,
    TaskFrequency,
)
from .validation import validate

log = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {"services", "recipes", "equipment", "processes", "hazard_taxonomy", "zones", "meta"}

_MISSING = object()


class _Reader:
    """Schema-level reader; collects problems instead of stopping at the first."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.violations: List[Violation] = []

    def fail(self, where: str, message: str, rule: str = "schema"):
        self.violations.append(Violation(where, rule, message))

    def obj(self, value, where: str, allowed: Iterable[str]) -> Optional[dict]:
        if not isinstance(value, dict):
            self.fail(where, f"expected an object, got {type(value).__name__}")
            return None
        unknown = sorted(set(value) - set(allowed))
        for key in unknown:
            if self.strict:
                self.fail(where, f"unknown key {key!r}", rule="unknown-key")
            else:
                log.warning("%s: ignoring unknown key %r", where, key)
        return value

    def get(self, obj: dict, key: str, where: str, kind, default=_MISSING):
        if key not in obj or obj[key] is None:
            if default is _MISSING:
                self.fail(where, f"missing required key {key!r}")
            return None if default is _MISSING else default
        value = obj[key]
        if kind is int and isinstance(value, bool):
            self.fail(where, f"{key!r} must be an integer")
            return None
        if kind is not None and not isinstance(value, kind):
            name = getattr(kind, "__name__", None) or "/".join(k.__name__ for k in kind)
            self.fail(where, f"{key!r} must be of type {name}")
            return None
        return value

    def items(self, obj: dict, key: str, where: str) -> list:
        value = self.get(obj, key, where, list, default=[])
        return value or []

    def enum(self, obj: dict, key: str, where: str, enum_cls, default=_MISSING):
        raw = self.get(obj, key, where, str, default=default)
        if raw is None or not isinstance(raw, str):
            return raw
        try:
            return enum_cls(raw)
        except ValueError:
            allowed = ", ".join(repr(m.value) for m in enum_cls)
            self.fail(where, f"{key!r} must be one of {allowed}, got {raw!r}")
            return None

    def scalar(self, value, where: str):
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            self.fail(where, f"expected a number or string, got {value!r}")
            return None
        return value

    def constraint(self, value, where: str):
        if not isinstance(value, list) or not value:
            self.fail(where, "constraint must be [lo, hi] or a non-empty list of strings")
            return None
        if all(isinstance(v, str) for v in value):
            return AllowedSet(frozenset(value))
        if len(value) == 2 and all(_is_number(v) for v in value):
            return Interval(value[0], value[1])
        self.fail(where, "constraint must be [lo, hi] or a non-empty list of strings")
        return None

    def assignment(self, value, where: str):
        if isinstance(value, list):
            if len(value) == 2 and all(_is_number(v) for v in value):
                return Interval(value[0], value[1])
            self.fail(where, "interval must be [lo, hi]")
            return None
        return self.scalar(value, where)

    def quantity(self, obj: dict, key: str, where: str) -> Optional[Quantity]:
        raw = obj.get(key)
        if raw is None:
            return None
        raw = self.obj(raw, f"{where}.{key}", {"value", "unit"})
        if raw is None:
            return None
        value = self.get(raw, "value", where, (int, float))
        unit = self.get(raw, "unit", where, str)
        if value is None or unit is None or isinstance(value, bool):
            return None
        return Quantity(value, unit)

    def strings(self, obj: dict, key: str, where: str) -> List[str]:
        out = []
        for i, raw in enumerate(self.items(obj, key, where)):
            if isinstance(raw, str):
                out.append(raw)
            else:
                self.fail(f"{where}.{key}[{i}]", "expected a string")
        return out


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _by_id(items):
    return tuple(sorted((i for i in items if i is not None), key=lambda x: x.id))


def _read_property(r: _Reader, raw, where) -> Optional[ServicePropertyDeclaration]:
    raw = r.obj(raw, where, {"id", "name", "kind", "unit", "bounds"})
    if raw is None:
        return None
    pid = r.get(raw, "id", where, str)
    kind = r.enum(raw, "kind", where, PropertyKind)
    if pid is None or kind is None:
        return None
    bounds = raw.get("bounds")
    return ServicePropertyDeclaration(
        id=pid,
        name=r.get(raw, "name", where, str, default=pid),
        kind=kind,
        unit=r.get(raw, "unit", where, str, default=""),
        bounds=None if bounds is None else r.constraint(bounds, f"{where}.bounds"),
    )


def _read_service(r: _Reader, raw, where) -> Optional[ServiceDeclaration]:
    raw = r.obj(raw, where, {"id", "name", "properties", "failure_modes"})
    if raw is None:
        return None
    sid = r.get(raw, "id", where, str)
    if sid is None:
        return None
    where = f"service {sid}"
    props = [
        _read_property(r, p, f"{where}.properties[{i}]")
        for i, p in enumerate(r.items(raw, "properties", where))
    ]
    modes = []
    for i, fm in enumerate(r.items(raw, "failure_modes", where)):
        fwhere = f"{where}.failure_modes[{i}]"
        fm = r.obj(fm, fwhere, {"id", "name", "description"})
        if fm is None:
            continue
        fid = r.get(fm, "id", fwhere, str)
        if fid is None:
            continue
        modes.append(
            FailureModeDeclaration(
                id=fid,
                name=r.get(fm, "name", fwhere, str, default=fid),
                service_ref=sid,
                description=r.get(fm, "description", fwhere, str, default=""),
            )
        )
    return ServiceDeclaration(
        id=sid,
        name=r.get(raw, "name", where, str, default=sid),
        properties=tuple(p for p in props if p is not None),
        failure_modes=_by_id(modes),
    )


def _read_recipe(r: _Reader, raw, where) -> Optional[Recipe]:
    raw = r.obj(raw, where, {"id", "name", "steps", "safety_requirement"})
    if raw is None:
        return None
    rid = r.get(raw, "id", where, str)
    if rid is None:
        return None
    where = f"recipe {rid}"
    steps = []
    for i, st in enumerate(r.items(raw, "steps", where)):
        swhere = f"{where}.steps[{i}]"
        st = r.obj(st, swhere, {"id", "service", "properties", "severities"})
        if st is None:
            continue
        sid = r.get(st, "id", swhere, str)
        service = r.get(st, "service", swhere, str)
        if sid is None or service is None:
            continue
        swhere = f"recipe {rid} step {sid}"
        assignments = {}
        for pid, value in r.get(st, "properties", swhere, dict, default={}).items():
            value = r.assignment(value, f"{swhere}.properties.{pid}")
            if value is not None:
                assignments[pid] = value
        severities = {}
        for fid, value in r.get(st, "severities", swhere, dict, default={}).items():
            if not _is_number(value) or value != int(value):
                r.fail(swhere, f"severity of {fid} must be an integer")
                continue
            severities[fid] = int(value)
        steps.append(RecipeStep(sid, service, assignments, severities))
    requirement = None
    req_raw = raw.get("safety_requirement")
    if req_raw is not None:
        rwhere = f"{where}.safety_requirement"
        req_raw = r.obj(req_raw, rwhere, {"minimum_performance_level"})
        if req_raw is not None:
            pl = r.enum(req_raw, "minimum_performance_level", rwhere, PerformanceLevel)
            if pl is not None:
                requirement = ProcessSafetyRequirement(pl)
    return Recipe(
        id=rid,
        name=r.get(raw, "name", where, str, default=rid),
        steps=tuple(steps),
        safety_requirement=requirement,
    )


def _read_coverage(r: _Reader, raw, where):
    raw = r.obj(
        raw,
        where,
        {"provider_equipment", "provider_service", "failure_mode", "detection",
         "decreased_occurrence", "mode"},
    )
    if raw is None:
        return None
    eq = r.get(raw, "provider_equipment", where, str)
    svc = r.get(raw, "provider_service", where, str)
    fm = r.get(raw, "failure_mode", where, str)
    det = r.get(raw, "detection", where, int)
    dec = r.get(raw, "decreased_occurrence", where, int, default=None)
    mode = r.enum(raw, "mode", where, CoverageMode, default="downstream-step")
    if None in (eq, svc, fm, det, mode):
        return None
    return QualityMeasureCoverage(EquipmentServiceRef(eq, svc), fm, det, mode, dec)


def _read_equipment(r: _Reader, raw, where) -> Optional[Equipment]:
    raw = r.obj(raw, where, {"id", "name", "services", "safety_functions"})
    if raw is None:
        return None
    eid = r.get(raw, "id", where, str)
    if eid is None:
        return None
    where = f"equipment {eid}"
    services = []
    for i, es in enumerate(r.items(raw, "services", where)):
        swhere = f"{where}.services[{i}]"
        es = r.obj(es, swhere, {"id", "service", "constraints", "failure_modes", "coverages"})
        if es is None:
            continue
        esid = r.get(es, "id", swhere, str)
        service = r.get(es, "service", swhere, str)
        if esid is None or service is None:
            continue
        swhere = f"equipment service {eid}/{esid}"
        constraints = {}
        for pid, value in r.get(es, "constraints", swhere, dict, default={}).items():
            value = r.constraint(value, f"{swhere}.constraints.{pid}")
            if value is not None:
                constraints[pid] = value
        modes = []
        for j, fm in enumerate(r.items(es, "failure_modes", swhere)):
            fwhere = f"{swhere}.failure_modes[{j}]"
            fm = r.obj(fm, fwhere, {"failure_mode", "occurrence"})
            if fm is None:
                continue
            ref = r.get(fm, "failure_mode", fwhere, str)
            occ = r.get(fm, "occurrence", fwhere, int)
            if ref is not None and occ is not None:
                modes.append(EquipmentFailureMode(ref, occ))
        coverages = [
            _read_coverage(r, c, f"{swhere}.coverages[{j}]")
            for j, c in enumerate(r.items(es, "coverages", swhere))
        ]
        services.append(
            EquipmentService(
                id=esid,
                service_ref=service,
                property_constraints=constraints,
                failure_modes=tuple(sorted(modes, key=lambda m: m.failure_mode_ref)),
                quality_coverages=tuple(
                    sorted((c for c in coverages if c is not None), key=lambda c: c.sort_key)
                ),
            )
        )
    functions = []
    for i, sf in enumerate(r.items(raw, "safety_functions", where)):
        fwhere = f"{where}.safety_functions[{i}]"
        sf = r.obj(
            sf,
            fwhere,
            {"id", "name", "performance_level", "hazard_types", "zones", "tasks",
             "max_hazard_speed"},
        )
        if sf is None:
            continue
        fid = r.get(sf, "id", fwhere, str)
        pl = r.enum(sf, "performance_level", fwhere, PerformanceLevel)
        if fid is None or pl is None:
            continue
        functions.append(
            SafetyFunction(
                id=fid,
                name=r.get(sf, "name", fwhere, str, default=fid),
                performance_level=pl,
                covered_hazard_types=frozenset(
                    HazardType.parse(t) for t in r.strings(sf, "hazard_types", fwhere)
                ),
                constraint=SafetyConstraint(
                    allowed_zones=frozenset(r.strings(sf, "zones", fwhere)),
                    applicable_task_refs=frozenset(r.strings(sf, "tasks", fwhere)),
                    max_hazard_speed=r.quantity(sf, "max_hazard_speed", fwhere),
                ),
            )
        )
    return Equipment(
        id=eid,
        name=r.get(raw, "name", where, str, default=eid),
        services=_by_id(services),
        safety_functions=_by_id(functions),
    )


def _read_process(r: _Reader, raw, where) -> Optional[Process]:
    raw = r.obj(raw, where, {"id", "recipe", "steps", "interaction_tasks", "hazards"})
    if raw is None:
        return None
    pid = r.get(raw, "id", where, str)
    recipe = r.get(raw, "recipe", where, str)
    if pid is None or recipe is None:
        return None
    where = f"process {pid}"
    steps = []
    for i, st in enumerate(r.items(raw, "steps", where)):
        swhere = f"{where}.steps[{i}]"
        st = r.obj(st, swhere, {"id", "equipment", "service", "recipe_step", "property_values"})
        if st is None:
            continue
        sid = r.get(st, "id", swhere, str)
        eq = r.get(st, "equipment", swhere, str)
        svc = r.get(st, "service", swhere, str)
        if None in (sid, eq, svc):
            continue
        values = {}
        for prop, value in r.get(st, "property_values", swhere, dict, default={}).items():
            value = r.scalar(value, f"{swhere}.property_values.{prop}")
            if value is not None:
                values[prop] = value
        steps.append(
            ProcessStep(
                id=sid,
                equipment_service=EquipmentServiceRef(eq, svc),
                property_values=values,
                recipe_step_ref=r.get(st, "recipe_step", swhere, str, default=None),
            )
        )
    tasks = []
    for i, t in enumerate(r.items(raw, "interaction_tasks", where)):
        twhere = f"{where}.interaction_tasks[{i}]"
        t = r.obj(t, twhere, {"id", "description", "frequency", "lifecycle_phase"})
        if t is None:
            continue
        tid = r.get(t, "id", twhere, str)
        freq = r.enum(t, "frequency", twhere, TaskFrequency)
        phase = r.enum(t, "lifecycle_phase", twhere, LifecyclePhase)
        if None in (tid, freq, phase):
            continue
        tasks.append(
            InteractionTask(tid, r.get(t, "description", twhere, str, default=""), freq, phase)
        )
    hazards = []
    for i, h in enumerate(r.items(raw, "hazards", where)):
        hwhere = f"{where}.hazards[{i}]"
        h = r.obj(
            h,
            hwhere,
            {"id", "task", "source_equipment", "hazard_type", "severity", "avoidance",
             "zone", "speed"},
        )
        if h is None:
            continue
        fields = (
            r.get(h, "id", hwhere, str),
            r.get(h, "task", hwhere, str),
            r.get(h, "source_equipment", hwhere, str),
            r.get(h, "hazard_type", hwhere, str),
            r.enum(h, "severity", hwhere, HazardSeverity),
            r.enum(h, "avoidance", hwhere, Avoidance),
            r.get(h, "zone", hwhere, str),
        )
        if None in fields:
            continue
        hid, task, source, htype, sev, avoid, zone = fields
        hazards.append(
            Hazard(
                id=hid,
                interaction_task_ref=task,
                source_equipment_ref=source,
                hazard_type=HazardType.parse(htype),
                severity=sev,
                avoidance=avoid,
                zone=zone,
                speed=r.quantity(h, "speed", hwhere),
            )
        )
    return Process(
        id=pid,
        recipe_ref=recipe,
        steps=tuple(steps),
        interaction_tasks=_by_id(tasks),
        hazards=_by_id(hazards),
    )


def build_repository(data: Any, strict: bool = True):
    """Build a repository without semantic validation.

    Returns ``(repository, schema_violations)``; the repository is ``None``
    when the top level is not an object.
    """
    r = _Reader(strict)
    doc = r.obj(data, "document", TOP_LEVEL_KEYS)
    if doc is None:
        return None, r.violations
    services = [_read_service(r, s, f"services[{i}]") for i, s in enumerate(r.items(doc, "services", "document"))]
    recipes = [_read_recipe(r, s, f"recipes[{i}]") for i, s in enumerate(r.items(doc, "recipes", "document"))]
    equipment = [_read_equipment(r, s, f"equipment[{i}]") for i, s in enumerate(r.items(doc, "equipment", "document"))]
    processes = [_read_process(r, s, f"processes[{i}]") for i, s in enumerate(r.items(doc, "processes", "document"))]
    if "hazard_taxonomy" in doc and doc["hazard_taxonomy"] is not None:
        taxonomy = tuple(
            sorted({HazardType.parse(t) for t in r.strings(doc, "hazard_taxonomy", "document")},
                   key=str)
        )
    else:
        taxonomy = ModelRepository().hazard_taxonomy
    meta = r.get(doc, "meta", "document", dict, default={})
    repo = ModelRepository(
        services=_by_id(services),
        recipes=_by_id(recipes),
        equipment=_by_id(equipment),
        processes=_by_id(processes),
        hazard_taxonomy=taxonomy,
        zones=tuple(sorted(set(r.strings(doc, "zones", "document")))),
        meta=meta,
    )
    return repo, r.violations


def parse_model(document: Union[str, bytes, dict], strict: bool = True) -> ModelRepository:
    """Parse and validate a model document (JSON text or an already decoded object).

    Raises ModelSyntaxError for malformed JSON and ModelValidationError when
    any schema rule or model invariant is broken.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    else:
        data = document
    repo, violations = build_repository(data, strict=strict)
    if repo is not None:
        violations = violations + validate(repo)
    if violations:
        raise ModelValidationError(sorted(set(violations)))
    return repo


def load_model(path: Union[str, Path], strict: bool = True) -> ModelRepository:
    return parse_model(Path(path).read_text(encoding="utf-8"), strict=strict)
