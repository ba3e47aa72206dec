import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwnca.topology import (Demand, Instance, Topology, TopologyError, all_to_one, cut_lower_bound,
                            degree_histogram, load_topology, simple_paths)

# every route printed in the two published dest-3 solutions
PUBLISHED_EDGES = {(1, 2), (1, 6), (1, 8), (2, 3), (2, 8), (2, 10), (3, 4), (3, 6), (3, 8), (3, 10), (4, 5),
                   (4, 10), (4, 11), (5, 6), (5, 7), (6, 7), (6, 9), (6, 11), (7, 8), (8, 9), (9, 10), (10, 11)}


def test_bundled_cost239_size(cost):
    assert len(cost.nodes) == 11
    assert len(cost.links) == 52


def test_bundled_contains_published_routes(cost):
    ours = {tuple(sorted(e)) for e in cost.edges}
    assert PUBLISHED_EDGES <= ours


def test_single_edge():
    t = load_topology("nodes 2\n1 2\n")
    assert len(t.nodes) == 2 and len(t.links) == 2
    assert t.reverse[0] == 1 and t.reverse[1] == 0


@pytest.mark.parametrize("text,line,fragment", [
    ("nodes 3\n1 2\n3 3\n", 3, "self-loop"),
    ("nodes 3\n1 2\n1 4\n", 3, "unknown node"),
    ("nodes 3\n1 2\n2 1\n", 3, "duplicate"),
    ("nodes 3\n# hi\n1 2 3\n", 3, "malformed"),
    ("edges 3\n", 1, "header"),
])
def test_parse_errors_name_the_line(text, line, fragment):
    with pytest.raises(TopologyError) as err:
        load_topology(text)
    assert err.value.line == line
    assert fragment in str(err.value)
    assert f"line {line}" in str(err.value)


def test_degree_histogram_cost239(cost):
    assert degree_histogram(cost) == {4: [1, 2, 4, 5], 5: [3, 7, 8, 9, 10, 11], 6: [6]}


def test_degree_sum_matches_edge_count(cost):
    hist = degree_histogram(cost)
    assert sum(deg * len(nodes) for deg, nodes in hist.items()) == 2 * len(cost.edges) == 52


def test_triangle_histogram():
    t = load_topology("nodes 3\n1 2\n2 3\n3 1\n")
    assert degree_histogram(t) == {2: [1, 2, 3]}


def test_all_to_one(cost):
    ds = all_to_one(cost, 3)
    assert [(d.src, d.dst) for d in ds] == [(v, 3) for v in (1, 2, 4, 5, 6, 7, 8, 9, 10, 11)]
    t2 = load_topology("nodes 2\n1 2\n")
    assert [(d.src, d.dst) for d in all_to_one(t2, 2)] == [(1, 2)]
    with pytest.raises(TopologyError):
        all_to_one(cost, 99)


def test_cut_bound_examples(cost):
    inst = Instance.create(cost, all_to_one(cost, 1), 5)
    assert cost.degree(1) == 4
    assert cut_lower_bound(inst, True) == 4
    assert cut_lower_bound(inst, False) == 5
    assert cut_lower_bound(Instance.create(cost, [], 1), True) == 0
    mixed = Instance.create(cost, [Demand(0, 1, 3), Demand(1, 2, 4)], 1)
    with pytest.raises(ValueError):
        cut_lower_bound(mixed, True)


def test_demand_invariants():
    with pytest.raises(ValueError):
        Demand(0, 2, 2)
    with pytest.raises(ValueError):
        Demand(0, 1, 2, capacity=2)


@st.composite
def graphs(draw):
    n = draw(st.integers(2, 8))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    flips = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    return n, [(v, u) if f else (u, v) for (u, v), f in zip(chosen, flips)]


@given(graphs())
def test_expand_collapse_round_trip(g):
    n, edges = g
    t = Topology.from_edges(range(1, n + 1), edges)
    assert t.edges == edges
    for l in t.links:
        r = t.links[t.reverse[l.id]]
        assert (r.src, r.dst) == (l.dst, l.src)
    assert load_topology(t.to_text()).edges == edges


@given(graphs(), st.data())
def test_all_to_one_and_bound_ordering(g, data):
    n, edges = g
    t = Topology.from_edges(range(1, n + 1), edges)
    dest = data.draw(st.sampled_from(t.nodes))
    ds = all_to_one(t, dest)
    assert len(ds) == n - 1 and {d.dst for d in ds} == {dest}
    if t.degree(dest):
        inst = Instance.create(t, ds, 1)
        assert cut_lower_bound(inst, True) <= cut_lower_bound(inst, False)


@settings(max_examples=40)
@given(graphs(), st.data())
def test_simple_paths_match_networkx(g, data):
    n, edges = g
    t = Topology.from_edges(range(1, n + 1), edges)
    s, d = data.draw(st.sampled_from([(a, b) for a in t.nodes for b in t.nodes if a != b]))
    G = nx.Graph(edges)
    G.add_nodes_from(t.nodes)
    want = sorted(tuple(p) for p in nx.all_simple_paths(G, s, d))
    assert sorted(simple_paths(t, s, d)) == want
    assert all(len(p) - 1 <= 2 for p in simple_paths(t, s, d, max_hops=2))
