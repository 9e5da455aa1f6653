import pytest

from crrank.graph import build_graph, prepare
from helpers import TOY_LINKS, TOY_SPEC, transitions_from, two_way_network


@pytest.fixture
def toy_network():
    return two_way_network(TOY_LINKS)


@pytest.fixture
def toy_transitions():
    return transitions_from(TOY_SPEC)


@pytest.fixture
def toy_prepared(toy_network, toy_transitions):
    graph = build_graph(toy_transitions)
    prof, mats = prepare(graph, toy_network, 0.2)
    return graph, prof, mats


# PASS/FAIL lines from the acceptance suite, repeated after the run so they
# show up even when output capture is on
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
