"""Greedy MAX N-CUT clustering of the V2V interference graph."""

import numpy as np
import pytest

from v2xalloc.channel import realize_channels
from v2xalloc.partition import (
    Clustering,
    InterferenceGraph,
    build_interference_graph,
    cut_weight,
    intra_cluster_weight,
    max_n_cut_partition,
)
from v2xalloc.scenario import ScenarioConfig, generate_topology


def _graph(w):
    return InterferenceGraph(w=np.asarray(w, dtype=float))


def test_hand_trace_four_links_two_clusters():
    # symmetric weights: (0,1)=5, (0,2)=1, (1,2)=0, (2,3)=2, rest 0.
    # seeds {0}, {1}; link 2 joins the zero-cost cluster of link 1;
    # link 3 avoids link 2's cluster and lands with link 0.
    w = np.zeros((4, 4))
    for a, b, v in ((0, 1, 5.0), (0, 2, 1.0), (1, 2, 0.0), (2, 3, 2.0)):
        w[a, b] = w[b, a] = v
    c = max_n_cut_partition(_graph(w), 2)
    assert c.assignment.tolist() == [0, 1, 1, 0]


def test_all_zero_ties_go_to_lowest_cluster():
    c = max_n_cut_partition(_graph(np.zeros((4, 4))), 2)
    assert c.assignment.tolist() == [0, 1, 0, 0]


def test_singleton_clusters_when_k_equals_n():
    rng = np.random.default_rng(0)
    w = rng.uniform(0.0, 1.0, size=(5, 5))
    np.fill_diagonal(w, 0.0)
    g = _graph(w)
    c = max_n_cut_partition(g, 5)
    assert c.assignment.tolist() == [0, 1, 2, 3, 4]
    assert intra_cluster_weight(g, c) == 0.0
    assert abs(cut_weight(g, c) - g.total_weight()) < 1e-12


def test_single_cluster_keeps_everything():
    rng = np.random.default_rng(1)
    w = rng.uniform(0.0, 1.0, size=(6, 6))
    np.fill_diagonal(w, 0.0)
    g = _graph(w)
    c = max_n_cut_partition(g, 1)
    assert np.all(c.assignment == 0)
    assert abs(intra_cluster_weight(g, c) - g.total_weight()) < 1e-12
    assert abs(cut_weight(g, c)) < 1e-12


def test_intra_plus_cut_equals_total():
    rng = np.random.default_rng(2)
    for _ in range(10):
        k = int(rng.integers(2, 12))
        n = int(rng.integers(1, k + 1))
        w = rng.exponential(1.0, size=(k, k))
        np.fill_diagonal(w, 0.0)
        g = _graph(w)
        c = max_n_cut_partition(g, n)
        total = g.total_weight()
        assert abs(intra_cluster_weight(g, c) + cut_weight(g, c)
                   - total) < 1e-9 * max(1.0, total)


def test_greedy_cut_meets_guarantee():
    # cut weight >= (1 - 1/N) * total on dense, heavy-tailed, and sparse graphs
    rng = np.random.default_rng(3)
    for idx in range(20):
        k = 30
        kind = idx % 3
        if kind == 0:
            w = rng.uniform(0.0, 1.0, size=(k, k))
        elif kind == 1:
            w = rng.exponential(1.0, size=(k, k))
        else:
            w = rng.uniform(0.0, 1.0, size=(k, k))
            w *= rng.random((k, k)) < 0.3
        np.fill_diagonal(w, 0.0)
        g = _graph(w)
        for n in (2, 5, 10):
            c = max_n_cut_partition(g, n)
            total = g.total_weight()
            assert cut_weight(g, c) >= (1.0 - 1.0 / n) * total - 1e-9 * total


def test_invalid_cluster_counts():
    g = _graph(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        max_n_cut_partition(g, 0)
    with pytest.raises(ValueError):
        max_n_cut_partition(g, 4)


def test_single_link_graph():
    g = _graph(np.zeros((1, 1)))
    c = max_n_cut_partition(g, 1)
    assert c.assignment.tolist() == [0]
    assert g.total_weight() == 0.0


def test_graph_matches_channel_state():
    cfg = ScenarioConfig(m_v2i=2, k_v2v=5, n_clusters=2)
    topo = generate_topology(cfg, np.random.default_rng(4))
    cs = realize_channels(topo, cfg, np.random.default_rng(5))
    g = build_interference_graph(cs)
    assert g.k_links == 5
    off = ~np.eye(5, dtype=bool)
    assert np.array_equal(g.w[off], cs.alpha_kk[off])
    assert np.all(np.diag(g.w) == 0.0)
    # directed: independent shadowing breaks reciprocity
    assert np.any(g.w[off] != g.w.T[off])


def test_clusters_listing():
    c = Clustering(assignment=np.array([1, 0, 1, 0]), n_clusters=2)
    members = c.clusters()
    assert members[0].tolist() == [1, 3]
    assert members[1].tolist() == [0, 2]
