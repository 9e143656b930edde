import numpy as np
import pytest

from linkwalk.graph import Graph


def cycle_edges(n):
    return [(i, (i + 1) % n) for i in range(n)]


def complete_edges(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def random_graph(rng, max_nodes=60, min_nodes=2, p_range=(0.05, 0.5)):
    """Random Erdos-Renyi style graph with at least one edge."""
    while True:
        n = int(rng.integers(min_nodes, max_nodes + 1))
        p = rng.uniform(*p_range)
        mask = np.triu(rng.random((n, n)) < p, 1)
        edges = np.argwhere(mask)
        if len(edges):
            return Graph.from_edges(edges, node_count=n)


@pytest.fixture
def path3():
    return Graph.from_edges([(0, 1), (1, 2)])


@pytest.fixture
def single_edge():
    return Graph.from_edges([(0, 1)])


@pytest.fixture
def triangle():
    return Graph.from_edges([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def small_catalog():
    """Path, cycle, star, complete, barbell families on <= 6 nodes."""
    return {
        "path4": Graph.from_edges([(i, i + 1) for i in range(3)]),
        "path6": Graph.from_edges([(i, i + 1) for i in range(5)]),
        "cycle5": Graph.from_edges(cycle_edges(5)),
        "cycle6": Graph.from_edges(cycle_edges(6)),
        "star5": Graph.from_edges([(0, i) for i in range(1, 5)]),
        "star6": Graph.from_edges([(0, i) for i in range(1, 6)]),
        "complete4": Graph.from_edges(complete_edges(4)),
        "complete6": Graph.from_edges(complete_edges(6)),
        "barbell6": Graph.from_edges(
            [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]
        ),
    }
