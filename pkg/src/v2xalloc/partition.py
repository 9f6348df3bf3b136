"""V2V link clustering by greedy weighted MAX N-CUT.

Links that interfere strongly should not share a resource block, so the
K V2V links are split into N clusters minimizing intra-cluster
interference weight — equivalently maximizing the weight cut between
clusters.  The directed weight from link j to link k is the large-scale
gain from j's transmitter to k's receiver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState


@dataclass
class InterferenceGraph:
    """Directed interference weights between V2V links; zero diagonal."""

    w: np.ndarray  # (K, K), w[j, k] = gain from tx of link j to rx of link k

    @property
    def k_links(self) -> int:
        return self.w.shape[0]

    def total_weight(self) -> float:
        return float(self.w.sum())


@dataclass
class Clustering:
    """Cluster index per V2V link."""

    assignment: np.ndarray   # (K,) int in [0, n_clusters)
    n_clusters: int

    def clusters(self) -> list[np.ndarray]:
        """Member link ids per cluster, ascending."""
        return [np.flatnonzero(self.assignment == n)
                for n in range(self.n_clusters)]


def build_interference_graph(cs: ChannelState) -> InterferenceGraph:
    w = np.array(cs.alpha_kk, dtype=float, copy=True)
    np.fill_diagonal(w, 0.0)
    return InterferenceGraph(w=w)


def max_n_cut_partition(graph: InterferenceGraph,
                        n_clusters: int) -> Clustering:
    """Greedy MAX N-CUT: seed N singleton clusters with links 0..N-1, then
    place each remaining link where it adds the least intra-cluster weight
    (sum of both directions against current members).  Ties go to the
    lowest cluster index.

    The greedy cut is at least (1 - 1/N) of the total graph weight.
    """
    k = graph.k_links
    n = n_clusters
    if not 1 <= n <= k:
        raise ValueError("need 1 <= n_clusters <= number of links")
    w = graph.w
    assignment = np.full(k, -1, dtype=int)
    assignment[:n] = np.arange(n)
    for link in range(n, k):
        cost = np.zeros(n)
        for c in range(n):
            members = np.flatnonzero(assignment[:link] == c)
            cost[c] = w[link, members].sum() + w[members, link].sum()
        assignment[link] = int(np.argmin(cost))
    return Clustering(assignment=assignment, n_clusters=n)


def intra_cluster_weight(graph: InterferenceGraph,
                         clustering: Clustering) -> float:
    """Total directed weight kept inside clusters."""
    total = 0.0
    for members in clustering.clusters():
        if len(members) > 1:
            total += graph.w[np.ix_(members, members)].sum()
    return float(total)


def cut_weight(graph: InterferenceGraph, clustering: Clustering) -> float:
    """Total directed weight crossing cluster boundaries."""
    return graph.total_weight() - intra_cluster_weight(graph, clustering)
