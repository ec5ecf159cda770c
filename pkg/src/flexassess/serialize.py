"""Canonical model documents.

``render_model`` output is stable: object keys are sorted, unordered
collections are sorted by id, and the text ends with a newline. Loading the
result gives back an equal repository.
"""

from __future__ import annotations

import json

from .model import AllowedSet, Interval, ModelRepository, Quantity


def _constraint(c):
    if isinstance(c, Interval):
        return [c.lo, c.hi]
    if isinstance(c, AllowedSet):
        return sorted(c.values)
    return c


def _quantity(q: Quantity):
    return {"value": q.value, "unit": q.unit}


def _by_id(items):
    return sorted(items, key=lambda x: x.id)


def _service(svc):
    props = []
    for p in svc.properties:
        d = {"id": p.id, "name": p.name, "kind": p.kind.value, "unit": p.unit}
        if p.bounds is not None:
            d["bounds"] = _constraint(p.bounds)
        props.append(d)
    return {
        "id": svc.id,
        "name": svc.name,
        "properties": props,
        "failure_modes": [
            {"id": fm.id, "name": fm.name, "description": fm.description}
            for fm in _by_id(svc.failure_modes)
        ],
    }


def _recipe(recipe):
    d = {
        "id": recipe.id,
        "name": recipe.name,
        "steps": [
            {
                "id": s.id,
                "service": s.service_ref,
                "properties": {k: _constraint(v) for k, v in s.property_assignments.items()},
                "severities": dict(s.failure_mode_severities),
            }
            for s in recipe.steps
        ],
    }
    if recipe.safety_requirement is not None:
        d["safety_requirement"] = {
            "minimum_performance_level": recipe.safety_requirement.minimum_performance_level.value
        }
    return d


def _coverage(c):
    d = {
        "provider_equipment": c.provider.equipment,
        "provider_service": c.provider.service,
        "failure_mode": c.covered_failure_mode_ref,
        "detection": c.detection,
        "mode": c.mode.value,
    }
    if c.decreased_occurrence is not None:
        d["decreased_occurrence"] = c.decreased_occurrence
    return d


def _safety_function(sf):
    d = {
        "id": sf.id,
        "name": sf.name,
        "performance_level": sf.performance_level.value,
        "hazard_types": sorted(str(t) for t in sf.covered_hazard_types),
        "zones": sorted(sf.constraint.allowed_zones),
        "tasks": sorted(sf.constraint.applicable_task_refs),
    }
    if sf.constraint.max_hazard_speed is not None:
        d["max_hazard_speed"] = _quantity(sf.constraint.max_hazard_speed)
    return d


def _equipment(eq):
    services = []
    for es in _by_id(eq.services):
        services.append(
            {
                "id": es.id,
                "service": es.service_ref,
                "constraints": {k: _constraint(v) for k, v in es.property_constraints.items()},
                "failure_modes": [
                    {"failure_mode": fm.failure_mode_ref, "occurrence": fm.occurrence}
                    for fm in sorted(es.failure_modes, key=lambda m: m.failure_mode_ref)
                ],
                "coverages": [
                    _coverage(c) for c in sorted(es.quality_coverages, key=lambda c: c.sort_key)
                ],
            }
        )
    return {
        "id": eq.id,
        "name": eq.name,
        "services": services,
        "safety_functions": [_safety_function(sf) for sf in _by_id(eq.safety_functions)],
    }


def _process(proc):
    steps = []
    for s in proc.steps:
        d = {
            "id": s.id,
            "equipment": s.equipment_service.equipment,
            "service": s.equipment_service.service,
            "property_values": dict(s.property_values),
        }
        if s.recipe_step_ref is not None:
            d["recipe_step"] = s.recipe_step_ref
        steps.append(d)
    hazards = []
    for h in _by_id(proc.hazards):
        d = {
            "id": h.id,
            "task": h.interaction_task_ref,
            "source_equipment": h.source_equipment_ref,
            "hazard_type": str(h.hazard_type),
            "severity": h.severity.value,
            "avoidance": h.avoidance.value,
            "zone": h.zone,
        }
        if h.speed is not None:
            d["speed"] = _quantity(h.speed)
        hazards.append(d)
    return {
        "id": proc.id,
        "recipe": proc.recipe_ref,
        "steps": steps,
        "interaction_tasks": [
            {
                "id": t.id,
                "description": t.description,
                "frequency": t.frequency.value,
                "lifecycle_phase": t.lifecycle_phase.value,
            }
            for t in _by_id(proc.interaction_tasks)
        ],
        "hazards": hazards,
    }


def model_to_document(repository: ModelRepository) -> dict:
    doc = {
        "services": [_service(s) for s in _by_id(repository.services)],
        "recipes": [_recipe(r) for r in _by_id(repository.recipes)],
        "equipment": [_equipment(e) for e in _by_id(repository.equipment)],
        "processes": [_process(p) for p in _by_id(repository.processes)],
        "hazard_taxonomy": sorted({str(t) for t in repository.hazard_taxonomy}),
        "zones": sorted(set(repository.zones)),
    }
    if repository.meta:
        doc["meta"] = repository.meta
    return doc


def render_model(repository: ModelRepository) -> str:
    return json.dumps(model_to_document(repository), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
