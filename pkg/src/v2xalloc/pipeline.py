"""End-to-end resource allocation for one channel realization.

Order of operations: cluster the V2V links (spectrum reuse groups),
solve closed-form power control for every (V2I link, cluster) pair —
the optimal powers do not depend on which resource block is used, while
the resulting V2I capacity does through the BS-side fast fading — then
pick the V2I x RB x cluster assignment by weighted 3-D matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelState
from .matching import build_hypergraph, match_3d
from .partition import Clustering, build_interference_graph, max_n_cut_partition
from .power import effective_threshold, outage_probability, solve_power_vector
from .scenario import ScenarioConfig

AUDIT_TOL = 1e-9


@dataclass
class Allocation:
    """Joint spectrum + power decision for one realization.

    `matches` holds (v2i m, resource block f, cluster n) triples.  Power
    values are mW; `p_d[n]` follows the ascending-link-id order of
    cluster n's members.  `capacity_table[m, n, f]` is the capacity the
    matcher saw (-inf where power control was infeasible) — kept as a
    diagnostic so baselines and audits need not re-run power control.
    """

    matches: list[tuple[int, int, int]]
    p_c: dict[int, float]
    p_d: dict[int, np.ndarray]
    clustering: Clustering
    rb_of_v2v: np.ndarray        # (K,) RB index or -1
    rb_of_v2i: np.ndarray        # (M,) RB index or -1
    unserved_v2i: list[int]
    unserved_clusters: list[int]
    total_weight: float
    capacity_table: np.ndarray   # (M, N, F)

    @property
    def served_links(self) -> np.ndarray:
        return np.flatnonzero(self.rb_of_v2v >= 0)


def compute_capacity_table(cs: ChannelState, config: ScenarioConfig,
                           clustering: Clustering):
    """Capacity of every (m, n, f) pattern plus the optimal powers.

    Returns (table, pc_tab, pd_tab): table is (M, N, F) with -inf where
    the cluster's reliability constraints cannot be met, pc_tab is
    (M, N), pd_tab maps (m, n) -> power vector.
    """
    gamma_bar = effective_threshold(config.gamma0, config.p0)
    m_count, f_count = cs.m_v2i, cs.n_rb
    clusters = clustering.clusters()
    table = np.full((m_count, clustering.n_clusters, f_count), -np.inf)
    pc_tab = np.zeros((m_count, clustering.n_clusters))
    pd_tab: dict[tuple[int, int], np.ndarray] = {}
    for n, links in enumerate(clusters):
        a_diag = cs.alpha_k[links]
        a_cross = cs.alpha_kk[np.ix_(links, links)]
        g_kb = cs.g_kB[links, :]                       # (L, F)
        for m in range(m_count):
            ok, p_c, p_d = solve_power_vector(
                cs.alpha_mk[m, links], a_diag, a_cross,
                cs.sigma2_veh, gamma_bar,
                config.pmax_c_mw, config.pmax_d_mw)
            if not ok:
                continue
            pc_tab[m, n] = p_c
            pd_tab[(m, n)] = p_d
            sinr = p_c * cs.g_mB[m, :] / (cs.sigma2_bs + p_d @ g_kb)
            table[m, n, :] = np.log2(1.0 + sinr)
    return table, pc_tab, pd_tab


def allocate(cs: ChannelState, config: ScenarioConfig,
             clustering: Clustering | None = None) -> Allocation:
    """Cluster, solve powers, match; the full decision for one realization."""
    if clustering is None:
        clustering = max_n_cut_partition(
            build_interference_graph(cs), config.n_clusters)
    table, pc_tab, pd_tab = compute_capacity_table(cs, config, clustering)
    matching = match_3d(build_hypergraph(table))

    clusters = clustering.clusters()
    rb_of_v2v = np.full(cs.k_v2v, -1, dtype=int)
    rb_of_v2i = np.full(cs.m_v2i, -1, dtype=int)
    p_c: dict[int, float] = {}
    p_d: dict[int, np.ndarray] = {}
    for m, f, n in matching.triples:
        rb_of_v2i[m] = f
        rb_of_v2v[clusters[n]] = f
        p_c[m] = float(pc_tab[m, n])
        p_d[n] = pd_tab[(m, n)]
    matched_m = {m for m, _, _ in matching.triples}
    matched_n = {n for _, _, n in matching.triples}
    return Allocation(
        matches=list(matching.triples),
        p_c=p_c, p_d=p_d, clustering=clustering,
        rb_of_v2v=rb_of_v2v, rb_of_v2i=rb_of_v2i,
        unserved_v2i=sorted(set(range(cs.m_v2i)) - matched_m),
        unserved_clusters=sorted(
            set(range(clustering.n_clusters)) - matched_n),
        total_weight=matching.total_weight,
        capacity_table=table,
    )


def sum_capacity(alloc: Allocation, cs: ChannelState) -> float:
    """Recompute the optimized objective from powers and gains."""
    clusters = alloc.clustering.clusters()
    total = 0.0
    for m, f, n in alloc.matches:
        interf = cs.sigma2_bs + float(
            alloc.p_d[n] @ cs.g_kB[clusters[n], f])
        total += math.log2(1.0 + alloc.p_c[m] * cs.g_mB[m, f] / interf)
    return total


def audit_allocation(alloc: Allocation, cs: ChannelState,
                     config: ScenarioConfig) -> list[str]:
    """Independent constraint checker; returns human-readable violations.

    Verifies RB exclusivity (one V2I link and one cluster per block, one
    block per V2I link and per cluster), power caps, the per-link
    reliability constraints of every served V2V link (large-scale SINR
    at the effective threshold and analytic outage within budget), and
    that the reported objective matches a recomputation.
    """
    problems: list[str] = []
    gamma_bar = effective_threshold(config.gamma0, config.p0)
    clusters = alloc.clustering.clusters()

    seen_f_v2i: dict[int, int] = {}
    seen_f_cl: dict[int, int] = {}
    seen_m, seen_n = set(), set()
    for m, f, n in alloc.matches:
        if f in seen_f_v2i:
            problems.append(f"RB {f} carries two V2I links")
        if f in seen_f_cl:
            problems.append(f"RB {f} carries two clusters")
        if m in seen_m:
            problems.append(f"V2I link {m} matched twice")
        if n in seen_n:
            problems.append(f"cluster {n} matched twice")
        seen_f_v2i[f] = m
        seen_f_cl[f] = n
        seen_m.add(m)
        seen_n.add(n)
        if not np.isfinite(alloc.capacity_table[m, n, f]):
            problems.append(f"match ({m},{f},{n}) uses an infeasible entry")

    for k in range(cs.k_v2v):
        n = int(alloc.clustering.assignment[k])
        f = alloc.rb_of_v2v[k]
        if n in seen_n:
            if f != next(ff for mm, ff, nn in alloc.matches if nn == n):
                problems.append(f"link {k} not on its cluster's RB")
        elif f != -1:
            problems.append(f"link {k} served though its cluster is not")

    cap_tol = 1.0 + AUDIT_TOL
    for m, f, n in alloc.matches:
        pc = alloc.p_c[m]
        pd = alloc.p_d[n]
        if not 0.0 <= pc <= config.pmax_c_mw * cap_tol:
            problems.append(f"V2I power of link {m} outside [0, cap]")
        if np.any(pd < 0.0) or np.any(pd > config.pmax_d_mw * cap_tol):
            problems.append(f"V2V power vector of cluster {n} outside caps")
        links = clusters[n]
        for i, k in enumerate(links):
            others = [j for j in range(len(links)) if j != i]
            interferers = [(pc, cs.alpha_mk[m, k])] + [
                (pd[j], cs.alpha_kk[links[j], k]) for j in others]
            interf = cs.sigma2_veh + sum(p * a for p, a in interferers)
            sinr = pd[i] * cs.alpha_k[k] / interf
            if sinr < gamma_bar * (1.0 - 1e-6):
                problems.append(
                    f"link {k}: large-scale SINR below the effective "
                    f"threshold ({sinr:.6g} < {gamma_bar:.6g})")
            out = outage_probability(
                pd[i], cs.alpha_k[k], interferers,
                cs.sigma2_veh, config.gamma0)
            if out > config.p0 * (1.0 + 1e-6):
                problems.append(
                    f"link {k}: analytic outage {out:.6g} above "
                    f"budget {config.p0}")

    recomputed = sum_capacity(alloc, cs)
    if abs(recomputed - alloc.total_weight) > 1e-9 * max(1.0, recomputed):
        problems.append(
            f"objective mismatch: reported {alloc.total_weight!r}, "
            f"recomputed {recomputed!r}")
    return problems
