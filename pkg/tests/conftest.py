import json

import pytest

from flexassess.fixtures import case_study, case_study_path


@pytest.fixture(scope="session")
def case_path():
    return case_study_path()


@pytest.fixture(scope="session")
def case_repo():
    return case_study()


@pytest.fixture
def case_doc(case_path):
    """Fresh, mutable copy of the case-study document."""
    return json.loads(case_path.read_text(encoding="utf-8"))


def minimal_doc():
    return {
        "services": [
            {
                "id": "drill",
                "name": "drill",
                "properties": [{"id": "speed", "name": "speed", "kind": "numeric", "unit": "rpm"}],
                "failure_modes": [{"id": "drill.skew", "name": "skew drill hole"}],
            }
        ],
        "recipes": [
            {
                "id": "R",
                "name": "R",
                "steps": [
                    {"id": "r1", "service": "drill", "properties": {"speed": [1000, 2000]},
                     "severities": {"drill.skew": 3}}
                ],
            }
        ],
        "equipment": [
            {
                "id": "d1",
                "name": "bench drill",
                "services": [
                    {"id": "drill", "service": "drill", "constraints": {"speed": [500, 3000]},
                     "failure_modes": [{"failure_mode": "drill.skew", "occurrence": 2}]}
                ],
            }
        ],
        "processes": [
            {"id": "P", "recipe": "R",
             "steps": [{"id": "p1", "equipment": "d1", "service": "drill",
                        "recipe_step": "r1", "property_values": {"speed": 1500}}]}
        ],
        "zones": [],
    }


@pytest.fixture
def small_doc():
    return minimal_doc()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
