import itertools
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from adaptmod import Graph, Partition, load_edge_list, load_partition

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


def clique_edges(nodes):
    return list(itertools.combinations(nodes, 2))


@pytest.fixture
def triangle():
    return Graph.from_edges([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return Graph.from_edges([(0, 1), (1, 2)])


@pytest.fixture
def two_k4():
    return Graph.from_edges(clique_edges(range(4)) + clique_edges(range(4, 8)))


@pytest.fixture
def two_k4_bridge():
    return Graph.from_edges(clique_edges(range(4)) + clique_edges(range(4, 8)) + [(3, 4)])


@pytest.fixture
def blocks2():
    return Partition([0] * 4 + [1] * 4)


def football_paths():
    """Edge list and ground truth of the college-football network, if present.

    Looked up in ``$ADAPTMOD_FOOTBALL_DIR`` or ``tests/data`` as
    ``football.edges`` plus ``football.truth`` (``label<TAB>conference``).
    """
    root = Path(os.environ.get("ADAPTMOD_FOOTBALL_DIR", DATA))
    edges, truth = root / "football.edges", root / "football.truth"
    if edges.is_file() and truth.is_file():
        return edges, truth
    return None


def load_football():
    paths = football_paths()
    if paths is None:
        return None
    g = load_edge_list(paths[0].read_text())
    return g, load_partition(paths[1].read_text(), g.labels)


def random_graph(rng, n, p):
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph(n, iu[keep], iv[keep])


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
