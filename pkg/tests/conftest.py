from __future__ import annotations

import pytest

from qgc.instances import build_hardware, build_mixgraph
from qgc.model import Placement, ProblemGraph, QState, RoutingProblem


def tiny_grid_problem() -> RoutingProblem:
    """One edge, two colors on a line mix-graph, on the 2x2 grid.

    Row 0 holds color 0, row 1 color 1, so both PS pairs and both MIX pairs
    start adjacent.
    """
    graph = ProblemGraph(2, frozenset({(0, 1)}))
    placement = Placement({QState(0, 0): 0, QState(1, 0): 1, QState(0, 1): 2, QState(1, 1): 3})
    return RoutingProblem.build(graph, build_mixgraph("line", 2), build_hardware("grid-2-2"), placement, "tiny-grid")


def tiny_line_problem() -> RoutingProblem:
    """Same goals on a 4-qubit path: 0_0 1_0 1_1 0_1."""
    graph = ProblemGraph(2, frozenset({(0, 1)}))
    placement = Placement({QState(0, 0): 0, QState(1, 0): 1, QState(1, 1): 2, QState(0, 1): 3})
    return RoutingProblem.build(graph, build_mixgraph("line", 2), build_hardware("line-2-2"), placement, "tiny-line")


@pytest.fixture
def tiny_grid() -> RoutingProblem:
    return tiny_grid_problem()


@pytest.fixture
def tiny_line() -> RoutingProblem:
    return tiny_line_problem()


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion exercised by this test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = getattr(report, "criterion", None)
    if number is None:
        return
    title = report.criterion_title
    outcome = "PASS" if report.outcome == "passed" else "FAIL"
    previous = _CRITERIA.get(number)
    if previous is None or previous[1] == "PASS":
        _CRITERIA[number] = (title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args[0]
        report.criterion_title = marker.args[1]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {outcome}  {title}")
