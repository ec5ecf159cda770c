import dataclasses
import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from flexassess import can_manufacture, match_recipe, parse_model, step_matches
from flexassess.errors import ModelInconsistencyError
from flexassess.matching import pair_match
from flexassess.model import (
    AllowedSet,
    EquipmentService,
    Interval,
    RecipeStep,
)

from generators import matching_instance


def brute_force_mappings(recipe, process, repo):
    """All order-preserving injective mappings, in lexicographic order."""
    n, m = len(recipe.steps), len(process.steps)
    for combo in itertools.combinations(range(m), n):
        if all(
            pair_match(recipe.steps[i], process.steps[j], repo).satisfied
            for i, j in enumerate(combo)
        ):
            yield combo


def test_convey_matches_convey(case_repo):
    rs = case_repo.recipe("R").steps[0]
    es = case_repo.equipment_by_id("belt-conveyor").service("convey")
    result = step_matches(rs, es, {"speed": 200}, case_repo)
    assert result.satisfied
    assert set(result.per_property) == {"speed"}


def test_service_mismatch():
    rs = RecipeStep("r", "drill")
    es = EquipmentService("c", "convey")
    result = step_matches(rs, es, {})
    assert not result.satisfied
    assert "service mismatch" in result.reason


def test_process_value_outside_equipment_interval():
    rs = RecipeStep("r", "s", {"x": Interval(10, 20)})
    es = EquipmentService("e", "s", {"x": Interval(15, 30)})
    result = step_matches(rs, es, {"x": 12})
    assert not result.satisfied
    assert not result.per_property["x"].satisfied
    assert "12 not in equipment constraint [15, 30]" in result.per_property["x"].reason


def test_unconstrained_property_is_unbounded():
    rs = RecipeStep("r", "s", {"x": Interval(10, 20)})
    assert step_matches(rs, EquipmentService("e", "s"), {"x": 12}).satisfied


def test_enumerated_property():
    rs = RecipeStep("r", "s", {"grip": "vacuum"})
    es = EquipmentService("e", "s", {"grip": AllowedSet(frozenset({"parallel"}))})
    assert not step_matches(rs, es, {"grip": "vacuum"}).satisfied
    es = EquipmentService("e", "s", {"grip": AllowedSet(frozenset({"parallel", "vacuum"}))})
    assert step_matches(rs, es, {"grip": "vacuum"}).satisfied


def test_unknown_property_raises(case_repo):
    rs = dataclasses.replace(case_repo.recipe("R").steps[0], property_assignments={"colour": "red"})
    es = case_repo.equipment_by_id("belt-conveyor").service("convey")
    with pytest.raises(ModelInconsistencyError):
        step_matches(rs, es, {}, case_repo)


def _oracle_property_ok(required, constraint, value):
    """Direct evaluation of the three containment conditions on plain numbers."""
    if value is None:
        return False
    lo, hi = (constraint if constraint is not None else (float("-inf"), float("inf")))
    if not lo <= value <= hi:
        return False
    if isinstance(required, tuple):
        rlo, rhi = required
        return lo <= rlo and rhi <= hi and rlo <= value <= rhi
    return lo <= required <= hi and value == required


@settings(max_examples=300, deadline=None)
@given(
    required=st.one_of(
        st.integers(0, 30),
        st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: tuple(sorted(t))),
    ),
    constraint=st.one_of(
        st.none(), st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: tuple(sorted(t)))
    ),
    value=st.one_of(st.none(), st.integers(0, 30)),
)
def test_step_matches_against_direct_oracle(required, constraint, value):
    req = Interval(*required) if isinstance(required, tuple) else required
    constraints = {} if constraint is None else {"x": Interval(*constraint)}
    values = {} if value is None else {"x": value}
    got = step_matches(RecipeStep("r", "s", {"x": req}), EquipmentService("e", "s", constraints), values)
    assert got.satisfied == _oracle_property_ok(required, constraint, value)


@settings(max_examples=200, deadline=None)
@given(
    required=st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: tuple(sorted(t))),
    constraint=st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: tuple(sorted(t))),
    widen=st.tuples(st.integers(0, 10), st.integers(0, 10)),
    value=st.integers(0, 30),
)
def test_widening_constraint_is_monotone(required, constraint, widen, value):
    rs = RecipeStep("r", "s", {"x": Interval(*required)})
    narrow = EquipmentService("e", "s", {"x": Interval(*constraint)})
    wide = EquipmentService("e", "s", {"x": Interval(constraint[0] - widen[0], constraint[1] + widen[1])})
    if step_matches(rs, narrow, {"x": value}).satisfied:
        assert step_matches(rs, wide, {"x": value}).satisfied


def test_case_study_match_has_extra_inspection(case_repo):
    result = match_recipe(case_repo.recipe("R"), case_repo.process("P"), case_repo)
    assert result.feasible
    assert [m.process_step_ref for m in result.assignment] == ["p1", "p2", "p3", "p4", "p5", "p6"]
    assert result.extra_process_steps == ("p6a",)


def test_swapped_steps_are_infeasible(case_doc):
    proc = next(p for p in case_doc["processes"] if p["id"] == "P")
    proc["steps"][0], proc["steps"][1] = proc["steps"][1], proc["steps"][0]
    for s in proc["steps"]:
        s.pop("recipe_step", None)
    repo = parse_model(case_doc)
    result = match_recipe(repo.recipe("R"), repo.process("P"), repo)
    assert not result.feasible
    assert result.assignment == ()
    # r1 takes p1 (now second); r2's only candidate p2 now precedes it
    assert result.diagnostics[0].startswith("recipe step r2 ")
    assert "p2" in result.diagnostics[0]


def test_declared_binding_blocks_reordering(case_doc):
    proc = next(p for p in case_doc["processes"] if p["id"] == "P")
    proc["steps"][0], proc["steps"][1] = proc["steps"][1], proc["steps"][0]
    repo = parse_model(case_doc)
    result = match_recipe(repo.recipe("R"), repo.process("P"), repo)
    assert not result.feasible
    assert result.diagnostics[0].startswith("recipe step r2 ")


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_greedy_equals_brute_force(rnd):
    repo, recipe, process = matching_instance(rnd)
    result = match_recipe(recipe, process, repo)
    first = next(brute_force_mappings(recipe, process, repo), None)
    assert result.feasible == (first is not None)
    if result.feasible:
        indices = tuple(process.step_index(m.process_step_ref) for m in result.assignment)
        assert indices == first
        assert list(indices) == sorted(set(indices))


def _with_steps(repo, process, steps):
    new = dataclasses.replace(process, steps=tuple(steps))
    return dataclasses.replace(repo, processes=(new,)), new


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_appending_extra_steps_keeps_feasibility(rnd):
    repo, recipe, process = matching_instance(rnd)
    before = match_recipe(recipe, process, repo).feasible
    extra = dataclasses.replace(process.steps[0], id="tail", recipe_step_ref=None)
    repo2, process2 = _with_steps(repo, process, process.steps + (extra,))
    after = match_recipe(recipe, process2, repo2)
    if before:
        assert after.feasible


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(0, 20))
def test_removing_extra_step_keeps_feasibility(rnd, pick):
    repo, recipe, process = matching_instance(rnd)
    result = match_recipe(recipe, process, repo)
    if not result.feasible or not result.extra_process_steps:
        return
    drop = result.extra_process_steps[pick % len(result.extra_process_steps)]
    repo2, process2 = _with_steps(repo, process, [s for s in process.steps if s.id != drop])
    assert match_recipe(recipe, process2, repo2).feasible


def test_can_manufacture_case_study(case_repo):
    result = can_manufacture(case_repo.recipe("R"), case_repo)
    assert result.capable
    used = {s.equipment_service.equipment for s in result.witness.steps}
    assert "belt-conveyor" in used
    assert all(e == "belt-conveyor" or e.startswith("robot-arm") for e in used)
    assert result.witness.interaction_tasks == () and result.witness.hazards == ()
    # the witness is itself a valid implementation of the recipe
    repo = dataclasses.replace(case_repo, processes=case_repo.processes + (result.witness,))
    assert match_recipe(case_repo.recipe("R"), result.witness, repo).feasible


def test_can_manufacture_missing_capability(case_doc):
    case_doc["equipment"] = [
        e for e in case_doc["equipment"] if not e["id"].startswith("robot-arm")
    ]
    for proc in case_doc["processes"]:
        proc["steps"] = [s for s in proc["steps"] if not s["equipment"].startswith("robot-arm")]
        proc["hazards"] = [h for h in proc.get("hazards", []) if not h["source_equipment"].startswith("robot")]
    repo = parse_model(case_doc)
    result = can_manufacture(repo.recipe("R"), repo)
    assert not result.capable
    assert result.witness is None
    assert result.missing_steps == ("r2", "r3", "r4", "r5")


def test_witness_prefers_lower_occurrence_sum(small_doc):
    eq = small_doc["equipment"][0]
    twin = json.loads(json.dumps(eq))
    twin["id"] = "a-drill"  # sorts first, so only the occurrence sum can prefer d1
    eq["services"][0]["failure_modes"][0]["occurrence"] = 3
    twin["services"][0]["failure_modes"][0]["occurrence"] = 5
    small_doc["equipment"].append(twin)
    repo = parse_model(small_doc)
    witness = can_manufacture(repo.recipe("R"), repo).witness
    assert str(witness.steps[0].equipment_service) == "d1/drill"
    assert witness.steps[0].property_values == {"speed": 1500.0}
