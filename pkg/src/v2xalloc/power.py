"""Closed-form optimal power control for one (V2I link, V2V cluster) pair
sharing one resource block.

The V2V reliability requirement — outage probability of each cluster
member below p0 at SINR target gamma0 — reduces, under exponential
fading on all vehicle-side links, to deterministic constraints on the
large-scale SINRs with an effective threshold

    gamma_bar = gamma0 / (-ln(1 - p0)).

At the optimum every V2V large-scale SINR constraint is tight, which
pins the V2V power vector as an affine function of the V2I power P_c
through the cluster matrix Phi; maximizing V2I capacity then pushes P_c
to the largest value that keeps every V2V power under its cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Relative slack accepted on power caps before declaring infeasibility,
# and the conditioning limit beyond which Phi is treated as singular.
CAP_SLACK = 1e-9
COND_LIMIT = 1e12


def effective_threshold(gamma0: float, p0: float) -> float:
    """gamma_bar = gamma0 / (-ln(1 - p0)); the outage-adjusted target."""
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly inside (0, 1)")
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    return gamma0 / (-math.log1p(-p0))


@dataclass
class PowerProblem:
    """One cluster on one resource block.

    Local link order inside the cluster is fixed; alpha_cross[j, i] is
    the large-scale gain from the transmitter of local link j to the
    receiver of local link i (zero diagonal).
    """

    alpha_m: np.ndarray       # (L,) V2I tx -> cluster receivers
    alpha_diag: np.ndarray    # (L,) direct V2V gains
    alpha_cross: np.ndarray   # (L, L) V2V cross gains
    g_mB_f: float             # instantaneous V2I tx -> BS gain on the RB
    g_kB_f: np.ndarray        # (L,) instantaneous V2V tx -> BS gains
    sigma2_bs: float
    sigma2_veh: float
    gamma_bar: float
    pmax_c: float
    pmax_d: float
    # optional provenance for pipeline traceability
    m: int = -1
    f: int = -1
    cluster: tuple = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return len(self.alpha_diag)


@dataclass
class PowerSolution:
    """Optimal powers for a PowerProblem.

    When infeasible, `capacity` is -inf and the power fields are zero;
    downstream code must branch on `feasible`, never on the sentinel.
    """

    feasible: bool
    p_c: float
    p_d: np.ndarray
    capacity: float


def build_phi(alpha_diag: np.ndarray, alpha_cross: np.ndarray,
              gamma_bar: float) -> np.ndarray:
    """Cluster matrix: direct gains on the diagonal, -gamma_bar times the
    cross gain (transposed into receiver-major orientation) elsewhere."""
    phi = -gamma_bar * np.asarray(alpha_cross, dtype=float).T
    np.fill_diagonal(phi, np.asarray(alpha_diag, dtype=float))
    return phi


def solve_power_vector(alpha_m, alpha_diag, alpha_cross, sigma2_veh,
                       gamma_bar, pmax_c, pmax_d):
    """Closed-form (P_c, P_d) independent of the BS-side gains.

    Returns (feasible, p_c, p_d).  The reliability constraints read
    Phi P_d >= gamma_bar (P_c alpha_m + sigma2 1) elementwise with
    equality at the optimum, so P_d(P_c) = Phi^{-1} gamma_bar
    (P_c alpha_m + sigma2 1); the per-link caps then bound P_c from
    above and the smallest bound (or the V2I cap) wins.
    """
    alpha_m = np.asarray(alpha_m, dtype=float)
    alpha_diag = np.asarray(alpha_diag, dtype=float)
    size = len(alpha_diag)
    phi = build_phi(alpha_diag, alpha_cross, gamma_bar)
    if not np.all(np.isfinite(phi)):
        return False, 0.0, np.zeros(size)
    cond = np.linalg.cond(phi)
    if not cond < COND_LIMIT:   # catches inf and nan of singular Phi
        return False, 0.0, np.zeros(size)
    # u: power response to unit noise, v: response to unit V2I power
    resp = np.linalg.solve(phi, np.column_stack([np.ones(size), alpha_m]))
    u, v = resp[:, 0], resp[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        bounds = (pmax_d - gamma_bar * sigma2_veh * u) / (gamma_bar * v)
    p_c = min(pmax_c, float(bounds.min()))
    rhs = gamma_bar * (p_c * alpha_m + sigma2_veh)
    p_d = gamma_bar * (p_c * v + sigma2_veh * u)
    # one step of iterative refinement keeps the reliability constraints
    # tight to machine precision even for ill-conditioned clusters
    p_d = p_d + np.linalg.solve(phi, rhs - phi @ p_d)
    ok = (np.isfinite(p_c) and np.all(np.isfinite(p_d))
          and p_c >= 0.0 and np.all(p_d >= 0.0)
          and p_c <= pmax_c * (1.0 + CAP_SLACK)
          and np.all(p_d <= pmax_d * (1.0 + CAP_SLACK)))
    if not ok:
        return False, 0.0, np.zeros(len(alpha_diag))
    return True, p_c, p_d


def v2i_capacity(p_c: float, p_d: np.ndarray, g_mB_f: float,
                 g_kB_f: np.ndarray, sigma2_bs: float) -> float:
    """Spectral efficiency log2(1 + SINR) of the V2I link at the BS, with
    the cluster's V2V transmitters as in-band interferers."""
    sinr = p_c * g_mB_f / (sigma2_bs + float(np.dot(p_d, g_kB_f)))
    return math.log2(1.0 + sinr)


def optimal_powers(problem: PowerProblem) -> PowerSolution:
    """Solve one cluster/RB instance end to end."""
    ok, p_c, p_d = solve_power_vector(
        problem.alpha_m, problem.alpha_diag, problem.alpha_cross,
        problem.sigma2_veh, problem.gamma_bar,
        problem.pmax_c, problem.pmax_d)
    if not ok:
        return PowerSolution(False, 0.0, np.zeros(problem.size),
                             float("-inf"))
    cap = v2i_capacity(p_c, p_d, problem.g_mB_f, problem.g_kB_f,
                       problem.sigma2_bs)
    return PowerSolution(True, p_c, p_d, cap)


def verify_tightness(problem: PowerProblem,
                     solution: PowerSolution) -> float:
    """Max relative deviation of large-scale V2V SINRs from gamma_bar.

    At a feasible optimum every cluster member's constraint is active, so
    this should vanish to solver precision.
    """
    if not solution.feasible:
        raise ValueError("tightness is only defined for feasible solutions")
    p_d = solution.p_d
    interference = (problem.sigma2_veh
                    + solution.p_c * problem.alpha_m
                    + p_d @ problem.alpha_cross)
    sinr = p_d * problem.alpha_diag / interference
    return float(np.max(np.abs(sinr / problem.gamma_bar - 1.0)))


def outage_probability(p_d_k: float, alpha_k: float, interference,
                       sigma2: float, gamma0: float) -> float:
    """Exact outage of one V2V link under exponential fading everywhere.

    `interference` is a sequence of (power, large-scale gain) pairs of
    in-band interferers.  With desired mean power s = P_d alpha_k,

        P_out = 1 - exp(-gamma0 sigma^2 / s) * prod_j 1/(1 + gamma0 I_j / s)

    where I_j is interferer j's mean received power.  Because
    ln(1+x) <= x, holding the large-scale SINR at gamma_bar =
    gamma0 / (-ln(1-p0)) keeps this value at or below p0 for any number
    of interferers.
    """
    if p_d_k <= 0:
        return 1.0
    s = p_d_k * alpha_k
    log_ok = -gamma0 * sigma2 / s
    for p, a in interference:
        log_ok -= math.log1p(gamma0 * p * a / s)
    return -math.expm1(log_ok)
