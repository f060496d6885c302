import time

import pytest

from svc_sim.cli import case_fixture
from svc_sim.io import parse_scenario
from svc_sim.scenario import run

_RUNS = {}
_CRITERIA = []


def case_run(case_id):
    """(scenario, result, wall-clock seconds) of a shipped case; each case is simulated once per session."""
    if case_id not in _RUNS:
        scenario = parse_scenario(case_fixture(case_id))
        t0 = time.perf_counter()
        result = run(scenario)
        _RUNS[case_id] = (scenario, result, time.perf_counter() - t0)
    return _RUNS[case_id]


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda x: x[0]):
        terminalreporter.write_line(line)
