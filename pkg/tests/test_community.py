import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptmod import (
    DegenerateWeightsError,
    DomainError,
    Graph,
    Partition,
    community_aggregates,
    fast_greedy,
    label_propagation,
    merge_delta,
    modularity,
)

from . import oracles
from .conftest import clique_edges, random_graph


def _random_partition(rng, n, k):
    return Partition(rng.integers(0, k, size=n))


def test_single_community_is_zero(two_k4_bridge):
    assert modularity(two_k4_bridge, Partition.single(8)) == pytest.approx(0.0, abs=1e-15)


def test_two_k4_components(two_k4, blocks2):
    assert modularity(two_k4, blocks2) == pytest.approx(0.5, abs=1e-15)
    assert modularity(two_k4, blocks2, use_weights=True) == pytest.approx(0.5, abs=1e-15)


def test_weighted_needs_positive_total(triangle):
    with pytest.raises(DegenerateWeightsError):
        modularity(triangle.with_weights([1.0, -1.0, 0.0]), Partition.single(3), use_weights=True)


def test_unit_weights_agree_exactly():
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = random_graph(rng, 12, 0.3)
        p = _random_partition(rng, 12, 4)
        assert modularity(g, p, use_weights=True) == modularity(g, p)


def test_bridge_delta(two_k4_bridge, blocks2):
    # |E| = 13 and d_c = 13 on both sides
    expected = 1 / 13 - 169 / (2 * 13**2)
    assert merge_delta(two_k4_bridge, blocks2, 0, 1) == pytest.approx(expected, abs=1e-15)


def test_disconnected_pair_delta(two_k4, blocks2):
    m = 12
    assert merge_delta(two_k4, blocks2, 0, 1) == pytest.approx(-12 * 12 / (2 * m * m), abs=1e-15)


def test_merge_with_self():
    with pytest.raises(DomainError):
        merge_delta(Graph.from_edges([(0, 1)]), Partition([0, 1]), 1, 1)


def test_delta_equals_recompute_on_random_merges():
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = random_graph(rng, int(rng.integers(4, 15)), 0.35)
        if g.n_edges == 0:
            continue
        weighted = bool(rng.integers(2))
        if weighted:
            g = g.with_weights(rng.uniform(0.1, 3.0, size=g.n_edges))
        p = _random_partition(rng, g.n_nodes, 5)
        ids = p.community_ids().tolist()
        if len(ids) < 2:
            continue
        a, b = rng.choice(ids, size=2, replace=False).tolist()
        before = modularity(g, p, weighted)
        after = modularity(g, p.merged(a, b), weighted)
        assert merge_delta(g, p, a, b, weighted) == pytest.approx(after - before, abs=1e-12)


@given(st.integers(1, 10), st.floats(0.1, 1.0), st.integers(1, 5), st.booleans(), st.integers(0, 10_000))
def test_modularity_matches_pair_oracle(n, p, k, weighted, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    weighted = weighted and g.n_edges > 0
    if weighted:
        g = g.with_weights(rng.uniform(0.1, 2.0, size=g.n_edges))
    part = _random_partition(rng, n, k)
    ref = oracles.modularity(g, part.labels.tolist(), weighted)
    assert modularity(g, part, weighted) == pytest.approx(ref, abs=1e-12)
    assert -0.5 - 1e-12 <= modularity(g, part, weighted) <= 1.0


@given(st.integers(2, 12), st.floats(0.1, 1.0), st.integers(1, 5), st.integers(0, 10_000))
def test_aggregates_match_recount(n, p, k, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    g = g.with_weights(rng.normal(1.0, 0.5, size=g.n_edges))
    part = _random_partition(rng, n, k)
    agg = community_aggregates(g, part)
    lab = part.labels
    for c in part.community_ids().tolist():
        w_in = sum(w for a, b, w in g.edges() if lab[a] == c and lab[b] == c)
        w_out = sum(w for a, b, w in g.edges() if (lab[a] == c) != (lab[b] == c))
        assert agg.inner[c] == pytest.approx(w_in, abs=1e-12)
        assert agg.outer[c] == pytest.approx(w_out, abs=1e-12)
        assert agg.total[c] == pytest.approx(2 * w_in + w_out, abs=1e-12)
        node_sum = g.weighted_degree[lab == c].sum()
        assert agg.total[c] == pytest.approx(node_sum, abs=1e-12)


def test_fast_greedy_two_k4(two_k4, blocks2):
    res = fast_greedy(two_k4)
    assert res.partition == blocks2
    assert res.q == pytest.approx(0.5, abs=1e-12)


def test_fast_greedy_bridge(two_k4_bridge, blocks2):
    res = fast_greedy(two_k4_bridge)
    assert res.partition == blocks2
    assert res.partition.n_communities == 2


def test_fast_greedy_triangle_is_deterministic(triangle):
    first = fast_greedy(triangle)
    # every merge ties; the (0, 1) pair is taken first
    assert (first.trace[0].kept, first.trace[0].absorbed) == (0, 1)
    for _ in range(3):
        again = fast_greedy(triangle)
        assert again.partition == first.partition and again.q == first.q
    assert first.q == pytest.approx(max(oracles.modularity(triangle, lab) for lab in oracles.set_partitions([0, 1, 2])))


def test_fast_greedy_empty():
    with pytest.raises(DomainError):
        fast_greedy(Graph(0, [], []))


def test_fast_greedy_rejects_nonpositive_weights(triangle):
    with pytest.raises(DomainError):
        fast_greedy(triangle.with_weights([1.0, 0.0, 2.0]), use_weights=True)


@given(st.integers(2, 25), st.floats(0.1, 0.6), st.booleans(), st.integers(0, 10_000))
def test_trace_consistency(n, p, weighted, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    if g.n_edges == 0:
        return
    if weighted:
        g = g.with_weights(rng.uniform(0.2, 3.0, size=g.n_edges))
    res = fast_greedy(g, use_weights=weighted)
    q = res.q_initial
    assert q == pytest.approx(modularity(g, Partition.singletons(n), weighted), abs=1e-12)
    part = Partition.singletons(n)
    for step in res.trace:
        expected = merge_delta(g, part, step.kept, step.absorbed, weighted)
        assert step.delta == pytest.approx(expected, abs=1e-12)
        assert step.q == pytest.approx(q + step.delta, abs=1e-12)
        part = part.merged(step.kept, step.absorbed)
        assert step.q == pytest.approx(modularity(g, part, weighted), abs=1e-12)
        q = step.q
    assert res.q == pytest.approx(modularity(g, res.partition, weighted), abs=1e-12)
    assert res.q == max([res.q_initial] + [s.q for s in res.trace])


def test_greedy_never_beats_brute_force():
    rng = np.random.default_rng(3)
    checked = 0
    for n in range(2, 8):
        for _ in range(6):
            g = random_graph(rng, n, 0.5)
            h = nx.Graph()
            h.add_nodes_from(range(n))
            h.add_edges_from(zip(g.u.tolist(), g.v.tolist()))
            if not nx.is_connected(h):
                continue
            best = max(oracles.modularity(g, lab) for lab in oracles.set_partitions(list(range(n))))
            assert fast_greedy(g).q <= best + 1e-12
            checked += 1
    assert checked > 10


def test_modularity_agrees_with_networkx():
    rng = np.random.default_rng(8)
    g = random_graph(rng, 30, 0.2)
    g = g.with_weights(rng.uniform(0.5, 2.0, size=g.n_edges))
    h = nx.Graph()
    h.add_nodes_from(range(30))
    h.add_weighted_edges_from(zip(g.u.tolist(), g.v.tolist(), g.weights.tolist()))
    part = fast_greedy(g, use_weights=True).partition
    comms = [set(c.tolist()) for c in part.communities()]
    assert modularity(g, part, True) == pytest.approx(nx.community.modularity(h, comms), abs=1e-12)


def test_label_propagation_components(two_k4, blocks2):
    for seed in range(5):
        assert label_propagation(two_k4, seed=seed) == blocks2


def test_label_propagation_clique():
    k5 = Graph.from_edges(clique_edges(range(5)))
    assert label_propagation(k5).n_communities == 1


def test_label_propagation_seeded():
    g = random_graph(np.random.default_rng(2), 40, 0.1)
    assert label_propagation(g, seed=3) == label_propagation(g, seed=3)


def test_label_propagation_keeps_isolated_nodes():
    g = Graph.from_edges([(0, 1)], n_nodes=3)
    part = label_propagation(g)
    assert part.n_nodes == 3 and part.n_communities == 2
