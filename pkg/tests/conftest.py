import numpy as np
import pytest

from rcdiffusion.graph import Graph
from rcdiffusion.model import Population, make_behaviors


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def make_pop(g, costs, resource, threshold=0.5, w=0.5, utilities=None):
    """Population with explicit resources and thresholds."""
    behaviors = make_behaviors(costs, utilities)
    n, k = g.node_count, len(behaviors)
    resource = np.broadcast_to(np.asarray(resource, dtype=float), (n,)).copy()
    threshold = np.broadcast_to(np.asarray(threshold, dtype=float), (n, k)).copy()
    return Population(behaviors, w, resource, threshold,
                      np.zeros((n, k), dtype=bool), np.zeros((n, k), dtype=bool))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    lines = getattr(acceptance, "VERDICTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
