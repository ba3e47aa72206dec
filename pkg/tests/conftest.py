import random

import networkx as nx
import pytest

from rwnca.io import reference_solution
from rwnca.topology import Demand, Instance, Topology, cost239

# butterfly: A=1, B=2, D=3, I=4, X=5
MICRO_EDGES = [(1, 3), (2, 3), (1, 4), (2, 4), (4, 5), (5, 3)]


def micro_instance(n_wavelengths: int = 1) -> Instance:
    t = Topology.from_edges(range(1, 6), MICRO_EDGES)
    return Instance.create(t, [Demand(0, 1, 3), Demand(1, 2, 3)], n_wavelengths)


def random_small_instance(rng: random.Random, max_nodes: int = 6, max_w: int = 2, same_dest: bool = True):
    """Two-connected graph on 4..max_nodes nodes with two demands."""
    n = rng.randint(4, max_nodes)
    while True:
        m = rng.randint(n, min(n * (n - 1) // 2, n + 3))
        g = nx.gnm_random_graph(n, m, seed=rng.randrange(10**9))
        if nx.is_connected(g) and nx.edge_connectivity(g) >= 2:
            break
    t = Topology.from_edges(range(1, n + 1), [(u + 1, v + 1) for u, v in g.edges])
    dst = rng.randint(1, n)
    srcs = rng.sample([v for v in t.nodes if v != dst], 2)
    if same_dest:
        demands = [Demand(i, s, dst) for i, s in enumerate(srcs)]
    else:
        d2 = rng.choice([v for v in t.nodes if v != srcs[1]])
        demands = [Demand(0, srcs[0], dst), Demand(1, srcs[1], d2)]
    return Instance.create(t, demands, rng.randint(1, max_w))


@pytest.fixture(scope="session")
def cost():
    return cost239()


@pytest.fixture(scope="session")
def ref4():
    return reference_solution(4)


@pytest.fixture(scope="session")
def ref5():
    return reference_solution(5)


@pytest.fixture(scope="session")
def ref5_instance(cost, ref5):
    return ref5.instance(cost)


@pytest.fixture(scope="session")
def ref4_instance(cost, ref4):
    return ref4.instance(cost)
