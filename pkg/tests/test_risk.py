import datetime as dt
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from flexassess import assess_process, parse_model
from flexassess.errors import ApprovalRefusedError, StaleReportError
from flexassess.model import Avoidance, HazardSeverity, PerformanceLevel, TaskFrequency
from flexassess.risk import (
    RISK_GRAPH,
    ApprovalState,
    RiskAssessmentReport,
    Verdict,
    applicable_safety_functions,
    approve,
    required_performance_level,
)

from generators import risk_model, upgrade_function

# ISO 13849-1 risk graph, written out by hand: (S, F, P) -> PLr
ISO_TABLE = {
    ("s1", "f1", "p1"): "a",
    ("s1", "f1", "p2"): "b",
    ("s1", "f2", "p1"): "b",
    ("s1", "f2", "p2"): "c",
    ("s2", "f1", "p1"): "c",
    ("s2", "f1", "p2"): "d",
    ("s2", "f2", "p1"): "d",
    ("s2", "f2", "p2"): "e",
}

AXES = (list(HazardSeverity), list(TaskFrequency), list(Avoidance))


def test_risk_graph_equals_iso_table():
    implemented = {(s.value, f.value, p.value): pl.value for (s, f, p), pl in RISK_GRAPH.items()}
    assert implemented == ISO_TABLE


def test_risk_graph_closed_form():
    # each higher parameter adds one level
    for s, f, p in itertools.product(*AXES):
        index = AXES[0].index(s) * 2 + AXES[1].index(f) + AXES[2].index(p)
        assert required_performance_level(s, f, p) is list(PerformanceLevel)[index]


@settings(max_examples=300)
@given(st.tuples(*(st.sampled_from(a) for a in AXES)), st.integers(0, 2))
def test_risk_graph_monotone(params, axis):
    upgraded = list(params)
    upgraded[axis] = AXES[axis][-1]
    assert required_performance_level(*upgraded) >= required_performance_level(*params)


def _hazard(process, hid):
    return next(h for h in process.hazards if h.id == hid)


def test_applicable_functions(case_repo):
    proc = case_repo.process("P-baseline")
    ids = lambda hid: [sf.id for sf in applicable_safety_functions(_hazard(proc, hid), proc, case_repo)]
    assert ids("h3") == []
    assert ids("h1") == ["light-curtain"]
    assert ids("h2") == ["light-curtain"]


def test_recipe_minimum_filters_functions(case_doc):
    case_doc["recipes"][0]["safety_requirement"] = {"minimum_performance_level": "e"}
    repo = parse_model(case_doc)
    proc = repo.process("P-baseline")
    assert applicable_safety_functions(_hazard(proc, "h1"), proc, repo) == []


def test_speed_limit_excludes_function(case_doc):
    eq = next(e for e in case_doc["equipment"] if e["id"] == "robot-arm-2")
    eq["safety_functions"][0]["max_hazard_speed"] = {"value": 1000, "unit": "mm/s"}
    repo = parse_model(case_doc)
    proc = repo.process("P-robot2")
    assert "sensor-skin" not in {
        sf.id for sf in applicable_safety_functions(_hazard(proc, "h1"), proc, repo)
    }


def test_baseline_assessment(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-baseline"), case_repo)
    rows = {r.hazard_ref: r for r in report.rows}
    assert rows["h1"].required_pl is PerformanceLevel.E and not rows["h1"].covered
    assert "light-curtain (PL d)" in rows["h1"].reason
    assert not rows["h3"].covered and rows["h3"].reason == "no applicable safety function"
    assert rows["h2"].covered and rows["h2"].covering_function_ref == "light-curtain"
    assert report.verdict is Verdict.UNFULFILLED
    assert report.uncovered_hazards == ["h1", "h3"]


def test_robot2_assessment(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-robot2"), case_repo)
    assert all(r.covered for r in report.rows)
    assert report.verdict is Verdict.FULFILLED
    assert {r.hazard_ref: r.covering_function_ref for r in report.rows} == {
        "h1": "sensor-skin", "h2": "light-curtain", "h3": "sensor-skin",
    }


def test_no_hazards_is_fulfilled(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P"), case_repo)
    assert report.rows == () and report.verdict is Verdict.FULFILLED


def test_report_round_trip(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-baseline"), case_repo)
    again = RiskAssessmentReport.from_dict(report.to_dict())
    assert again == report and again.digest == report.digest


def test_approve_fulfilled(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-robot2"), case_repo)
    when = dt.datetime(2024, 5, 1, 12, 0, tzinfo=dt.timezone(dt.timedelta(hours=2)))
    approval = approve(report, "alice", when, repository=case_repo, expected_digest=report.digest)
    assert approval.report_digest == report.digest
    assert approval.timestamp == dt.datetime(2024, 5, 1, 10, 0, tzinfo=dt.timezone.utc)
    assert report.approval_state is ApprovalState.APPROVED


def test_approve_refused(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-baseline"), case_repo)
    with pytest.raises(ApprovalRefusedError) as exc:
        approve(report, "alice")
    assert set(exc.value.uncovered) == {"h1", "h3"}
    assert report.approval_state is ApprovalState.PENDING


def test_approve_stale_model(case_doc, case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-robot2"), case_repo)
    case_doc["equipment"][0]["name"] = "renamed conveyor"
    with pytest.raises(StaleReportError):
        approve(report, "alice", repository=parse_model(case_doc))
    with pytest.raises(StaleReportError):
        approve(report, "alice", expected_digest="0" * 64)
    assert report.approval_state is ApprovalState.PENDING


def test_blank_approver_rejected(case_repo):
    report = assess_process(case_repo.recipe("R"), case_repo.process("P-robot2"), case_repo)
    with pytest.raises(ValueError):
        approve(report, " ")


def _covered(repo):
    report = assess_process(repo.recipe("R"), repo.process("P"), repo)
    return {r.hazard_ref for r in report.rows if r.covered}, report


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_upgrading_function_never_shrinks_coverage(rnd):
    repo = risk_model(rnd)
    upgraded = upgrade_function(rnd, repo)
    if upgraded is None:
        return
    assert _covered(repo)[0] <= _covered(upgraded)[0]


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_never_approved_while_unfulfilled(rnd):
    repo = risk_model(rnd)
    covered, report = _covered(repo)
    if report.verdict is Verdict.UNFULFILLED:
        with pytest.raises(ApprovalRefusedError):
            approve(report, "qa")
        assert report.approval_state is ApprovalState.PENDING
    else:
        assert covered == {h.id for h in repo.process("P").hazards}
        approve(report, "qa", repository=repo)
        assert report.approval_state is ApprovalState.APPROVED
