"""Semantic validation of a model repository.

Violations are returned as data, sorted, so that the result does not depend
on the order in which elements were declared.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import List

from .errors import Violation
from .model import (
    AllowedSet,
    Interval,
    ModelRepository,
    PropertyKind,
    SCORE_RANGE,
    ServiceDeclaration,
)

_ID = re.compile(r"^\S+$")


def _duplicates(ids):
    return sorted(k for k, n in Counter(ids).items() if n > 1)


class _Checker:
    def __init__(self, repo: ModelRepository):
        self.repo = repo
        self.out: List[Violation] = []
        self.task_ids = {t.id for p in repo.processes for t in p.interaction_tasks}
        self.taxonomy = set(repo.hazard_taxonomy)
        self.zones = set(repo.zones)

    def add(self, element, rule, message):
        self.out.append(Violation(element, rule, message))

    def ident(self, element, value):
        if not isinstance(value, str) or not _ID.match(value):
            self.add(element, "invalid-id", f"id {value!r} must be non-empty and whitespace-free")

    def unique(self, element, label, ids):
        for dup in _duplicates(ids):
            self.add(element, "duplicate-id", f"duplicate {label} id {dup!r}")

    def score(self, element, what, value):
        if isinstance(value, bool) or not isinstance(value, int) or value not in SCORE_RANGE:
            self.add(element, f"{what}-range", f"{what} out of range 1..5: {value!r}")

    def constraint_kind(self, element, prop, constraint, label):
        if isinstance(constraint, Interval):
            if prop.kind is not PropertyKind.NUMERIC:
                self.add(element, "constraint-kind",
                         f"{label} for {prop.kind.value} property {prop.id} must be a value set")
            elif constraint.empty:
                self.add(element, "constraint-empty", f"{label} of {prop.id} is empty")
        elif isinstance(constraint, AllowedSet):
            if prop.kind is PropertyKind.NUMERIC:
                self.add(element, "constraint-kind",
                         f"{label} for numeric property {prop.id} must be [lo, hi]")
            elif constraint.empty:
                self.add(element, "constraint-empty", f"{label} of {prop.id} is empty")

    def value_kind_ok(self, prop, value) -> bool:
        numeric = isinstance(value, (int, float)) and not isinstance(value, bool)
        if prop.kind is PropertyKind.NUMERIC:
            return numeric or isinstance(value, Interval)
        return isinstance(value, str)

    # -- categories ------------------------------------------------------

    def services(self):
        repo = self.repo
        self.unique("document", "service", [s.id for s in repo.services])
        self.unique("document", "failure mode",
                    [fm.id for s in repo.services for fm in s.failure_modes])
        for svc in repo.services:
            where = f"service {svc.id}"
            self.ident(where, svc.id)
            self.unique(where, "property", [p.id for p in svc.properties])
            for name in _duplicates([p.name for p in svc.properties]):
                self.add(where, "duplicate-name", f"property name {name!r} used twice")
            for name in _duplicates([fm.name for fm in svc.failure_modes]):
                self.add(where, "duplicate-name", f"failure mode name {name!r} used twice")
            for prop in svc.properties:
                self.ident(where, prop.id)
                if prop.kind is PropertyKind.NUMERIC and not prop.unit:
                    self.add(where, "unit-missing", f"numeric property {prop.id} needs a unit")
                if prop.bounds is not None:
                    self.constraint_kind(where, prop, prop.bounds, "bounds")
            for fm in svc.failure_modes:
                self.ident(where, fm.id)
                if fm.service_ref != svc.id:
                    self.add(where, "failure-mode-foreign",
                             f"failure mode {fm.id} names owner {fm.service_ref}")

    def recipes(self):
        repo = self.repo
        self.unique("document", "recipe", [r.id for r in repo.recipes])
        for recipe in repo.recipes:
            where = f"recipe {recipe.id}"
            self.ident(where, recipe.id)
            if not recipe.steps:
                self.add(where, "recipe-empty", "recipe has no steps")
            self.unique(where, "step", [s.id for s in recipe.steps])
            for step in recipe.steps:
                self.recipe_step(f"{where} step {step.id}", step)

    def recipe_step(self, where, step):
        self.ident(where, step.id)
        svc = self.repo.service(step.service_ref)
        if svc is None:
            self.add(where, "dangling-ref", f"unknown service {step.service_ref}")
            return
        for pid, value in sorted(step.property_assignments.items()):
            prop = svc.property(pid)
            if prop is None:
                self.add(where, "property-unknown", f"service {svc.id} has no property {pid}")
                continue
            if not self.value_kind_ok(prop, value):
                self.add(where, "property-kind",
                         f"property {pid} expects a {prop.kind.value} value, got {value!r}")
                continue
            if isinstance(value, Interval) and value.empty:
                self.add(where, "constraint-empty", f"interval for {pid} is empty")
            elif prop.bounds is not None and not prop.bounds.contains(value):
                self.add(where, "property-bounds",
                         f"property {pid} value {value} outside bounds {prop.bounds}")
        for fid, sev in sorted(step.failure_mode_severities.items()):
            self.owned_failure_mode(where, svc, fid)
            self.score(where, "severity", sev)

    def owned_failure_mode(self, where, svc: ServiceDeclaration, fid) -> bool:
        fm = self.repo.failure_mode(fid)
        if fm is None:
            self.add(where, "dangling-ref", f"unknown failure mode {fid}")
            return False
        if fm.service_ref != svc.id:
            self.add(where, "failure-mode-foreign",
                     f"failure mode {fid} belongs to service {fm.service_ref}, not {svc.id}")
            return False
        return True

    def equipment(self):
        repo = self.repo
        self.unique("document", "equipment", [e.id for e in repo.equipment])
        self.unique("document", "safety function",
                    [f.id for e in repo.equipment for f in e.safety_functions])
        for eq in repo.equipment:
            where = f"equipment {eq.id}"
            self.ident(where, eq.id)
            self.unique(where, "service", [s.id for s in eq.services])
            for es in eq.services:
                self.equipment_service(f"equipment service {eq.id}/{es.id}", es)
            for sf in eq.safety_functions:
                self.safety_function(f"safety function {eq.id}/{sf.id}", sf)

    def equipment_service(self, where, es):
        self.ident(where, es.id)
        svc = self.repo.service(es.service_ref)
        if svc is None:
            self.add(where, "dangling-ref", f"unknown service {es.service_ref}")
            return
        for pid, constraint in sorted(es.property_constraints.items()):
            prop = svc.property(pid)
            if prop is None:
                self.add(where, "property-unknown", f"service {svc.id} has no property {pid}")
                continue
            self.constraint_kind(where, prop, constraint, "constraint")
        for dup in _duplicates([fm.failure_mode_ref for fm in es.failure_modes]):
            self.add(where, "duplicate-id", f"failure mode {dup} listed twice")
        for efm in es.failure_modes:
            self.owned_failure_mode(where, svc, efm.failure_mode_ref)
            self.score(where, "occurrence", efm.occurrence)
        for cov in es.quality_coverages:
            provider = self.repo.equipment_service(cov.provider)
            if provider is None:
                self.add(where, "dangling-ref", f"unknown coverage provider {cov.provider}")
            fm = self.repo.failure_mode(cov.covered_failure_mode_ref)
            if fm is None:
                self.add(where, "dangling-ref",
                         f"unknown covered failure mode {cov.covered_failure_mode_ref}")
            elif provider is not es:
                # declared on the covered service: the target must be one of its own modes
                self.owned_failure_mode(where, svc, cov.covered_failure_mode_ref)
            self.score(where, "detection", cov.detection)
            if cov.decreased_occurrence is not None:
                self.score(where, "occurrence", cov.decreased_occurrence)

    def safety_function(self, where, sf):
        self.ident(where, sf.id)
        if not sf.covered_hazard_types:
            self.add(where, "hazard-types-empty", "safety function covers no hazard type")
        for ht in sorted(sf.covered_hazard_types, key=str):
            self.hazard_type(where, ht)
        for zone in sorted(sf.constraint.allowed_zones):
            if not zone or zone not in self.zones:
                self.add(where, "dangling-ref", f"unknown zone {zone!r}")
        for task in sorted(sf.constraint.applicable_task_refs):
            if task not in self.task_ids:
                self.add(where, "dangling-ref", f"unknown interaction task {task}")

    def hazard_type(self, where, ht):
        if not ht.path or not all(ht.path):
            self.add(where, "hazard-type-unknown", f"malformed hazard type {str(ht)!r}")
            return
        if not any(ht.covers(t) for t in self.taxonomy):
            self.add(where, "hazard-type-unknown", f"hazard type {ht} not in taxonomy")

    def processes(self):
        repo = self.repo
        self.unique("document", "process", [p.id for p in repo.processes])
        for proc in repo.processes:
            self.process(proc)

    def process(self, proc):
        repo = self.repo
        where = f"process {proc.id}"
        self.ident(where, proc.id)
        recipe = repo.recipe(proc.recipe_ref)
        if recipe is None:
            self.add(where, "dangling-ref", f"unknown recipe {proc.recipe_ref}")
        if not proc.steps:
            self.add(where, "process-empty", "process has no steps")
        self.unique(where, "step", [s.id for s in proc.steps])
        self.unique(where, "interaction task", [t.id for t in proc.interaction_tasks])
        self.unique(where, "hazard", [h.id for h in proc.hazards])
        mapped = [s.recipe_step_ref for s in proc.steps if s.recipe_step_ref is not None]
        for dup in _duplicates(mapped):
            self.add(where, "recipe-step-twice", f"recipe step {dup} mapped by several steps")
        for step in proc.steps:
            swhere = f"{where} step {step.id}"
            self.ident(swhere, step.id)
            if (step.recipe_step_ref is not None and recipe is not None
                    and recipe.step(step.recipe_step_ref) is None):
                self.add(swhere, "dangling-ref",
                         f"recipe {recipe.id} has no step {step.recipe_step_ref}")
            es = repo.equipment_service(step.equipment_service)
            if es is None:
                self.add(swhere, "dangling-ref",
                         f"unknown equipment service {step.equipment_service}")
                continue
            svc = repo.service(es.service_ref)
            for pid, value in sorted(step.property_values.items()):
                prop = svc.property(pid) if svc is not None else None
                if prop is None:
                    self.add(swhere, "property-unknown",
                             f"service {es.service_ref} has no property {pid}")
                    continue
                if isinstance(value, Interval) or not self.value_kind_ok(prop, value):
                    self.add(swhere, "property-kind",
                             f"property {pid} expects a {prop.kind.value} value, got {value!r}")
                    continue
                constraint = es.property_constraints.get(pid)
                if constraint is not None and not constraint.contains(value):
                    self.add(swhere, "property-constraint",
                             f"property {pid} value {value} outside equipment constraint "
                             f"{constraint}")
        for task in proc.interaction_tasks:
            self.ident(where, task.id)
        task_ids = {t.id for t in proc.interaction_tasks}
        for hz in proc.hazards:
            hwhere = f"{where} hazard {hz.id}"
            self.ident(hwhere, hz.id)
            if hz.interaction_task_ref not in task_ids:
                self.add(hwhere, "dangling-ref",
                         f"interaction task {hz.interaction_task_ref} not in process")
            if repo.equipment_by_id(hz.source_equipment_ref) is None:
                self.add(hwhere, "dangling-ref", f"unknown equipment {hz.source_equipment_ref}")
            if hz.zone not in self.zones:
                self.add(hwhere, "dangling-ref", f"unknown zone {hz.zone!r}")
            self.hazard_type(hwhere, hz.hazard_type)

    def run(self) -> List[Violation]:
        for zone in self.repo.zones:
            self.ident("document", zone)
        self.services()
        self.recipes()
        self.equipment()
        self.processes()
        return sorted(set(self.out))


def validate(repository: ModelRepository) -> List[Violation]:
    """Return every broken invariant of ``repository``; empty when valid."""
    return _Checker(repository).run()
