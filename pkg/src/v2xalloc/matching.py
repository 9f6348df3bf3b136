"""Weighted 3-dimensional matching: V2I link x resource block x cluster.

Exact maximum-weight 3-D matching is NP-hard, so the matcher rounds the
packing-LP relaxation: solve the LP to a vertex, order edges by
iterative peeling (a vertex always leaves some edge whose remaining
closed neighbourhood carries x-mass <= 2), run local-ratio weight
decomposition along that order, and finally augment greedily.  The
result carries at least half of the LP optimum, hence at least half of
the best matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import BasicSolution, LinearProgram, solve_lp_basic

PEEL_TOL = 1e-9
BRUTE_EDGE_LIMIT = 33
BRUTE_SIZE_LIMIT = 4


@dataclass
class Hypergraph3:
    """Tripartite hyperedges (m, f, n) with real weights.

    Edges are stored in lexicographic (m, f, n) order and triples are
    unique; several operations rely on both properties.
    """

    m_size: int
    f_size: int
    n_size: int
    em: np.ndarray   # (E,) int
    ef: np.ndarray   # (E,) int
    en: np.ndarray   # (E,) int
    w: np.ndarray    # (E,) float

    @property
    def n_edges(self) -> int:
        return len(self.w)

    def triple(self, e: int) -> tuple[int, int, int]:
        return int(self.em[e]), int(self.ef[e]), int(self.en[e])

    def validate(self) -> None:
        E = self.n_edges
        if not (len(self.em) == len(self.ef) == len(self.en) == E):
            raise ValueError("edge arrays disagree in length")
        for arr, size, name in ((self.em, self.m_size, "m"),
                                (self.ef, self.f_size, "f"),
                                (self.en, self.n_size, "n")):
            if E and (arr.min() < 0 or arr.max() >= size):
                raise ValueError(f"{name} index out of range")
        if not np.all(np.isfinite(self.w)):
            raise ValueError("weights must be finite")
        keys = (self.em.astype(np.int64) * self.f_size + self.ef
                ) * self.n_size + self.en
        if E and len(np.unique(keys)) != E:
            raise ValueError("duplicate edge triple")
        if E > 1 and np.any(np.diff(keys) < 0):
            raise ValueError("edges must be in lexicographic (m, f, n) order")


@dataclass
class Matching3D:
    """A set of pairwise disjoint hyperedges."""

    edges: list[int]                      # ascending edge indices
    triples: list[tuple[int, int, int]]
    total_weight: float


def _make_matching(h: Hypergraph3, chosen) -> Matching3D:
    chosen = sorted(int(e) for e in chosen)
    return Matching3D(
        edges=chosen,
        triples=[h.triple(e) for e in chosen],
        total_weight=float(sum(h.w[e] for e in chosen)),
    )


def build_hypergraph(capacity: np.ndarray) -> Hypergraph3:
    """Edges from a capacity table indexed [m, n, f]; non-finite entries
    (infeasible power control) produce no edge."""
    capacity = np.asarray(capacity, dtype=float)
    if capacity.ndim != 3:
        raise ValueError("capacity table must be (M, N, F)")
    m_size, n_size, f_size = capacity.shape
    em, ef, en, w = [], [], [], []
    for m in range(m_size):
        for f in range(f_size):
            for n in range(n_size):
                c = capacity[m, n, f]
                if np.isfinite(c):
                    em.append(m)
                    ef.append(f)
                    en.append(n)
                    w.append(c)
    return Hypergraph3(
        m_size=m_size, f_size=f_size, n_size=n_size,
        em=np.array(em, dtype=int), ef=np.array(ef, dtype=int),
        en=np.array(en, dtype=int), w=np.array(w, dtype=float))


def build_matching_lp(h: Hypergraph3) -> LinearProgram:
    """One packing row per vertex of each side (empty rows kept so the
    row count is always m_size + f_size + n_size)."""
    h.validate()
    rows = []
    for side, size in ((h.em, h.m_size), (h.ef, h.f_size),
                       (h.en, h.n_size)):
        for v in range(size):
            rows.append(np.flatnonzero(side == v))
    return LinearProgram(n_vars=h.n_edges,
                         objective=h.w.astype(float),
                         rows=rows)


def peel_ordering(h: Hypergraph3, x, tol: float = PEEL_TOL) -> np.ndarray:
    """Order all edges so that, at its turn, each edge's closed
    neighbourhood among not-yet-peeled edges carries x-mass <= 2.

    Such an edge always exists when x is a vertex of the matching LP;
    if none exists the input was not basic and a ValueError is raised.
    Ties resolve to the lexicographically first edge.
    """
    if isinstance(x, BasicSolution):
        x = x.x
    x = np.asarray(x, dtype=float)
    if len(x) != h.n_edges:
        raise ValueError("x length does not match edge count")
    em, ef, en = h.em, h.ef, h.en
    s_m = np.bincount(em, weights=x, minlength=h.m_size)
    s_f = np.bincount(ef, weights=x, minlength=h.f_size)
    s_n = np.bincount(en, weights=x, minlength=h.n_size)
    s_mf = np.zeros((h.m_size, h.f_size))
    s_mn = np.zeros((h.m_size, h.n_size))
    s_fn = np.zeros((h.f_size, h.n_size))
    np.add.at(s_mf, (em, ef), x)
    np.add.at(s_mn, (em, en), x)
    np.add.at(s_fn, (ef, en), x)

    alive = np.ones(h.n_edges, dtype=bool)
    order = np.empty(h.n_edges, dtype=int)
    for step in range(h.n_edges):
        # closed-neighbourhood mass by inclusion-exclusion over the three
        # shared-vertex conditions (triples are unique, so the triple
        # intersection is the edge itself)
        mass = (s_m[em] + s_f[ef] + s_n[en]
                - s_mf[em, ef] - s_mn[em, en] - s_fn[ef, en] + x)
        ok = alive & (mass <= 2.0 + tol)
        if not ok.any():
            raise ValueError(
                "no edge with remaining neighbourhood mass <= 2; "
                "the LP solution is not a vertex")
        e = int(np.argmax(ok))   # first qualifying edge, lexicographic
        order[step] = e
        alive[e] = False
        xe = x[e]
        s_m[em[e]] -= xe
        s_f[ef[e]] -= xe
        s_n[en[e]] -= xe
        s_mf[em[e], ef[e]] -= xe
        s_mn[em[e], en[e]] -= xe
        s_fn[ef[e], en[e]] -= xe
    return order


def local_ratio(h: Hypergraph3, order, w=None) -> Matching3D:
    """Local-ratio rounding along a peel order.

    Forward pass: for each edge with positive running weight, subtract
    that weight from its whole closed neighbourhood and push the edge.
    Backward pass: pop, keeping edges that fit the matching.  Combined
    with the peeling invariant this yields a 1/2-approximation of the
    LP optimum.
    """
    run = np.array(h.w if w is None else w, dtype=float, copy=True)
    if len(run) != h.n_edges:
        raise ValueError("weight vector length does not match edge count")
    em, ef, en = h.em, h.ef, h.en
    stack = []
    for e in np.asarray(order, dtype=int):
        if run[e] > 0.0:
            nbr = (em == em[e]) | (ef == ef[e]) | (en == en[e])
            run[nbr] -= run[e]
            stack.append(int(e))
    chosen = []
    used_m, used_f, used_n = set(), set(), set()
    for e in reversed(stack):
        if (em[e] not in used_m and ef[e] not in used_f
                and en[e] not in used_n):
            chosen.append(e)
            used_m.add(int(em[e]))
            used_f.add(int(ef[e]))
            used_n.add(int(en[e]))
    return _make_matching(h, chosen)


def greedy_augment(matching: Matching3D, h: Hypergraph3) -> Matching3D:
    """Add nonnegative-weight edges in weight-descending order (ties by
    lexicographic triple) wherever they stay disjoint; negative edges
    never enter.  The result is maximal among w >= 0 edges."""
    used_m = {m for m, _, _ in matching.triples}
    used_f = {f for _, f, _ in matching.triples}
    used_n = {n for _, _, n in matching.triples}
    chosen = list(matching.edges)
    for e in np.lexsort((h.en, h.ef, h.em, -h.w)):
        e = int(e)
        if h.w[e] < 0.0 or e in matching.edges:
            continue
        m, f, n = h.triple(e)
        if m in used_m or f in used_f or n in used_n:
            continue
        chosen.append(e)
        used_m.add(m)
        used_f.add(f)
        used_n.add(n)
    return _make_matching(h, chosen)


def match_3d(h: Hypergraph3) -> Matching3D:
    """Full pipeline: LP vertex -> peel order -> local ratio -> greedy."""
    h.validate()
    if h.n_edges == 0:
        return Matching3D(edges=[], triples=[], total_weight=0.0)
    sol = solve_lp_basic(build_matching_lp(h))
    order = peel_ordering(h, sol.x)
    return greedy_augment(local_ratio(h, order), h)


def dump_hypergraph_csv(h: Hypergraph3, matching: Matching3D,
                        path: str) -> None:
    """Debug dump: every edge with its weight and whether it was chosen."""
    chosen = set(matching.edges)
    with open(path, "w", newline="") as fh:
        fh.write("m,f,n,weight,chosen\n")
        for e in range(h.n_edges):
            m, f, n = h.triple(e)
            fh.write(f"{m},{f},{n},{float(h.w[e])!r},{int(e in chosen)}\n")


def brute_force_match(h: Hypergraph3) -> Matching3D:
    """Exact maximum-weight matching by memoized search; referee only.

    Only positive-weight edges can help, so others are dropped up front.
    Guarded against instances too large to enumerate.
    """
    h.validate()
    if (h.n_edges > BRUTE_EDGE_LIMIT
            and max(h.m_size, h.f_size, h.n_size) > BRUTE_SIZE_LIMIT):
        raise ValueError("instance too large for the exhaustive matcher")
    keep = np.flatnonzero(h.w > 0.0)
    order = keep[np.argsort(-h.w[keep], kind="stable")]
    E = len(order)
    memo: dict[tuple, tuple[float, bool]] = {}

    def best(i: int, mm: int, fm: int, nm: int) -> float:
        if i == E:
            return 0.0
        key = (i, mm, fm, nm)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        e = int(order[i])
        skip = best(i + 1, mm, fm, nm)
        take_val, take = skip, False
        bm, bf, bn = 1 << int(h.em[e]), 1 << int(h.ef[e]), 1 << int(h.en[e])
        if not (mm & bm or fm & bf or nm & bn):
            cand = h.w[e] + best(i + 1, mm | bm, fm | bf, nm | bn)
            if cand > skip:
                take_val, take = cand, True
        memo[key] = (take_val, take)
        return take_val

    best(0, 0, 0, 0)
    chosen = []
    i, mm, fm, nm = 0, 0, 0, 0
    while i < E:
        _, take = memo[(i, mm, fm, nm)]
        e = int(order[i])
        if take:
            chosen.append(e)
            mm |= 1 << int(h.em[e])
            fm |= 1 << int(h.ef[e])
            nm |= 1 << int(h.en[e])
        i += 1
    return _make_matching(h, chosen)
