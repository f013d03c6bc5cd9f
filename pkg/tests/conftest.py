import pytest

from fairassign import matching
from fairassign.netcore import FILLED, OPEN, AttributedGraph, Position
from fairassign.problem import AssignmentInstance, Candidate


@pytest.fixture(autouse=True)
def _label_checks():
    matching.CHECK_LABELS = True
    yield
    matching.CHECK_LABELS = False


def make_graph(classes, edges, k=2, teams=None):
    """classes: list of int or None (None marks an open position); ids are 'n0', 'n1', ..."""
    positions = [
        Position(f"n{i}", OPEN if c is None else FILLED, c, team=None if teams is None else teams[i])
        for i, c in enumerate(classes)
    ]
    return AttributedGraph(positions, [(f"n{a}", f"n{b}") for a, b in edges], k)


def make_instance(graph, candidates, fitness):
    """candidates: list of (id, class); fitness: {(position, candidate): w}."""
    return AssignmentInstance(graph, tuple(Candidate(c, k) for c, k in candidates), dict(fitness))


CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
