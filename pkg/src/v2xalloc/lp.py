"""Packing-LP solver returning vertex (basic feasible) solutions.

The matching relaxation is max w'x subject to unit-coefficient rows
x(rows_i) <= 1 and x >= 0, where every variable appears in exactly three
rows (one per side of the tripartite structure).  A dense primal simplex
with Bland's anti-cycling rule starts from the all-slack basis — always
feasible here since rhs = 1 — and therefore terminates at a vertex of
the polytope; vertex-ness is what the downstream peeling step relies on,
so it is certified rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
DUAL_TOL = 1e-8
MAX_PIVOTS = 100_000


@dataclass
class LinearProgram:
    """max objective . x  s.t.  sum(x[row]) <= 1 per row, x >= 0."""

    n_vars: int
    objective: np.ndarray       # (n_vars,)
    rows: list[np.ndarray]      # variable index arrays, unit coefficients

    def validate(self) -> None:
        if self.n_vars < 1:
            raise ValueError("LP needs at least one variable")
        if len(self.objective) != self.n_vars:
            raise ValueError("objective length does not match n_vars")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective must be finite")
        counts = np.zeros(self.n_vars, dtype=int)
        for i, row in enumerate(self.rows):
            row = np.asarray(row)
            if row.size and (row.min() < 0 or row.max() >= self.n_vars):
                raise ValueError(f"row {i}: variable index out of range")
            if len(np.unique(row)) != len(row):
                raise ValueError(f"row {i}: repeated variable")
            counts[row] += 1
        if not np.all(counts == 3):
            raise ValueError(
                "each variable must appear in exactly 3 rows "
                "(tripartite matching structure)")


@dataclass
class BasicSolution:
    """Vertex solution with its optimality certificate."""

    x: np.ndarray
    objective_value: float
    basis: tuple[int, ...]       # column indices (vars then slacks)
    dual_residual: float         # max reduced cost at termination


def solve_lp_basic(lp: LinearProgram, tol: float = PIVOT_TOL) -> BasicSolution:
    """Primal simplex from the slack basis, Bland's rule throughout.

    Bland's rule (lowest-index entering column; ratio ties resolved
    toward the lowest-index basic variable) precludes cycling, and every
    simplex iterate is a basic feasible solution, so the returned point
    is a vertex by construction.
    """
    lp.validate()
    n = lp.n_vars
    r = len(lp.rows)
    ncols = n + r

    tab = np.zeros((r, ncols + 1))
    for i, row in enumerate(lp.rows):
        tab[i, np.asarray(row, dtype=int)] = 1.0
    tab[:, n:ncols] = np.eye(r)
    tab[:, -1] = 1.0

    cost = np.zeros(ncols)
    cost[:n] = lp.objective
    basis = list(range(n, ncols))

    for _ in range(MAX_PIVOTS):
        y = cost[basis] @ tab[:, :ncols]
        reduced = cost - y
        candidates = np.flatnonzero(reduced > tol)
        if candidates.size == 0:
            break
        enter = int(candidates[0])                      # Bland: lowest index
        col = tab[:, enter]
        pos = np.flatnonzero(col > tol)
        if pos.size == 0:
            raise ValueError("LP is unbounded (cannot happen for valid "
                             "packing rows)")
        ratios = tab[pos, -1] / col[pos]
        best = ratios.min()
        tied = pos[ratios <= best + tol * max(1.0, best)]
        leave = int(tied[np.argmin([basis[i] for i in tied])])  # Bland
        pivot = tab[leave, enter]
        tab[leave] /= pivot
        others = np.arange(r) != leave
        tab[others] -= np.outer(tab[others, enter], tab[leave])
        basis[leave] = enter
    else:
        raise RuntimeError("simplex exceeded pivot budget")

    x_full = np.zeros(ncols)
    x_full[basis] = tab[:, -1]
    x = x_full[:n].copy()
    dual_residual = float(reduced.max()) if reduced.size else 0.0
    if dual_residual > DUAL_TOL:
        raise RuntimeError("simplex stopped without dual feasibility")
    return BasicSolution(
        x=x,
        objective_value=float(lp.objective @ x),
        basis=tuple(basis),
        dual_residual=dual_residual,
    )


def check_basic(lp: LinearProgram, x: np.ndarray,
                tol: float = 1e-7) -> bool:
    """True iff x is a basic feasible solution (polytope vertex).

    Feasibility is checked directly; vertex-ness holds iff the active
    constraints — tight packing rows plus tight non-negativity bounds —
    have rank n_vars.
    """
    x = np.asarray(x, dtype=float)
    if len(x) != lp.n_vars:
        raise ValueError("solution length does not match LP")
    if np.any(x < -tol):
        return False
    active = []
    for row in lp.rows:
        row = np.asarray(row, dtype=int)
        if abs(x[row].sum() - 1.0) <= tol:
            a = np.zeros(lp.n_vars)
            a[row] = 1.0
            active.append(a)
        elif x[row].sum() > 1.0 + tol:
            return False
    for j in np.flatnonzero(np.abs(x) <= tol):
        a = np.zeros(lp.n_vars)
        a[j] = 1.0
        active.append(a)
    if not active:
        return lp.n_vars == 0
    rank = np.linalg.matrix_rank(np.array(active), tol=1e-9)
    return bool(rank == lp.n_vars)
