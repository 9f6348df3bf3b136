"""Link-level channel models.

Channel power gain of a link factors as g = alpha * |h|^2 where alpha is
the large-scale part (pathloss + log-normal shadowing + antenna gains)
and |h|^2 is unit-mean exponential fast fading (Rayleigh envelope).

Two pathloss laws are used: the macro-cell urban law for anything that
terminates at the BS, and a two-slope LOS street-level law for
vehicle-to-vehicle links.
"""

from __future__ import annotations

import csv
import math
import pathlib
from dataclasses import dataclass, replace

import numpy as np

from .scenario import ScenarioConfig, Topology

C_MS = 3.0e8              # propagation speed for the breakpoint distance
V2V_MIN_DIST_M = 3.0      # street model is clamped below this separation


def pathloss_v2i_db(d_km: float) -> float:
    """Macro-cell pathloss toward the BS at 2 GHz: 128.1 + 37.6 log10(d)."""
    if d_km <= 0:
        raise ValueError("distance must be positive")
    return 128.1 + 37.6 * math.log10(d_km)


def pathloss_v2v_db(d_m: float, fc_ghz: float,
                    tx_height_m: float = 1.5,
                    rx_height_m: float = 1.5) -> float:
    """Two-slope street-level LOS pathloss between vehicles.

    Below the breakpoint d_BP = 4 h1' h2' fc / c (effective antenna
    heights h' = h - 1 m) the slope is 22.7 log10 d; beyond it the slope
    steepens to 40 log10 d, anchored at the breakpoint so the curve is
    exactly continuous.  Distances below 3 m are clamped to 3 m.
    """
    if d_m <= 0:
        raise ValueError("distance must be positive")
    if fc_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    if tx_height_m <= 1.0 or rx_height_m <= 1.0:
        raise ValueError("antenna heights must exceed 1 m")
    d = max(d_m, V2V_MIN_DIST_M)
    h1 = tx_height_m - 1.0
    h2 = rx_height_m - 1.0
    d_bp = 4.0 * h1 * h2 * fc_ghz * 1e9 / C_MS

    def near(x: float) -> float:
        return 22.7 * math.log10(x) + 41.0 + 20.0 * math.log10(fc_ghz / 5.0)

    if d <= d_bp:
        return near(d)
    return near(d_bp) + 40.0 * math.log10(d / d_bp)


def large_scale_gain(pl_db: float, shadow_db: float,
                     ant_gains_dbi: float) -> float:
    """Linear power gain from dB budget: antenna gains - pathloss - shadow."""
    return 10.0 ** ((ant_gains_dbi - pl_db - shadow_db) / 10.0)


def draw_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential |h|^2 samples."""
    return rng.exponential(1.0, size=size)


@dataclass
class ChannelState:
    """Large-scale gains plus the BS-side fast fading of one realization.

    alpha matrices are linear power gains (antenna gains included):
      alpha_mB[m]      V2I tx m -> BS
      alpha_kB[k]      V2V tx of link k -> BS
      alpha_k[k]       V2V link k, tx -> own rx
      alpha_mk[m, k]   V2I tx m -> rx of V2V link k
      alpha_kk[j, k]   V2V tx of link j -> rx of link k (diagonal zero)
    g_mB / g_kB are instantaneous gains alpha * |h|^2 per resource block
    (BS side is sampled once per allocation; vehicle-side fading is drawn
    on demand by the evaluation loop).
    """

    alpha_mB: np.ndarray
    alpha_kB: np.ndarray
    alpha_k: np.ndarray
    alpha_mk: np.ndarray
    alpha_kk: np.ndarray
    g_mB: np.ndarray        # (M, F)
    g_kB: np.ndarray        # (K, F)
    sigma2_bs: float
    sigma2_veh: float

    @property
    def m_v2i(self) -> int:
        return len(self.alpha_mB)

    @property
    def k_v2v(self) -> int:
        return len(self.alpha_k)

    @property
    def n_rb(self) -> int:
        return self.g_mB.shape[1]


def _bs_distances_km(pos: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """3-D vehicle->BS distance (BS antenna height minus vehicle height)."""
    dh = config.bs_height_m - config.veh_height_m
    d_m = np.sqrt(pos[:, 0] ** 2 + pos[:, 1] ** 2 + dh ** 2)
    return d_m / 1000.0


def realize_channels(topology: Topology, config: ScenarioConfig,
                     rng: np.random.Generator) -> ChannelState:
    """Draw shadowing and BS-side fading for one drop.

    Draw order is fixed (V2I->BS, V2V->BS, V2V direct, V2I->V2V rx,
    V2V->V2V cross shadows, then g_mB, g_kB fading) so runs are
    reproducible for a given rng state.
    """
    m, k, f = config.m_v2i, config.k_v2v, config.n_rb
    pos = topology.pos
    tx_ids = topology.v2i_tx
    pair_tx = topology.v2v_pairs[:, 0]
    pair_rx = topology.v2v_pairs[:, 1]

    gain_bs = config.bs_gain_dbi + config.veh_gain_dbi   # BS-terminating
    gain_vv = 2.0 * config.veh_gain_dbi                  # vehicle-to-vehicle

    d_bs_km = _bs_distances_km(pos, config)
    pl_mB = np.array([pathloss_v2i_db(d_bs_km[i]) for i in tx_ids])
    pl_kB = np.array([pathloss_v2i_db(d_bs_km[i]) for i in pair_tx])

    def v2v_pl(a: int, b: int) -> float:
        d = math.hypot(pos[a, 0] - pos[b, 0], pos[a, 1] - pos[b, 1])
        return pathloss_v2v_db(d, config.carrier_freq_ghz,
                               config.veh_height_m, config.veh_height_m)

    pl_k = np.array([v2v_pl(t, r) for t, r in zip(pair_tx, pair_rx)])
    pl_mk = np.array([[v2v_pl(t, r) for r in pair_rx] for t in tx_ids])
    pl_kk = np.array([[0.0 if j == i else v2v_pl(pair_tx[j], pair_rx[i])
                       for i in range(k)] for j in range(k)])

    sh_v2i = config.shadow_std_v2i_db
    sh_v2v = config.shadow_std_v2v_db
    shadow_mB = rng.normal(0.0, sh_v2i, size=m)
    shadow_kB = rng.normal(0.0, sh_v2i, size=k)
    shadow_k = rng.normal(0.0, sh_v2v, size=k)
    shadow_mk = rng.normal(0.0, sh_v2v, size=(m, k))
    shadow_kk = rng.normal(0.0, sh_v2v, size=(k, k))

    to_lin = large_scale_gain
    alpha_mB = np.array([to_lin(p, s, gain_bs)
                         for p, s in zip(pl_mB, shadow_mB)])
    alpha_kB = np.array([to_lin(p, s, gain_bs)
                         for p, s in zip(pl_kB, shadow_kB)])
    alpha_k = np.array([to_lin(p, s, gain_vv)
                        for p, s in zip(pl_k, shadow_k)])
    alpha_mk = 10.0 ** ((gain_vv - pl_mk - shadow_mk) / 10.0)
    alpha_kk = 10.0 ** ((gain_vv - pl_kk - shadow_kk) / 10.0)
    np.fill_diagonal(alpha_kk, 0.0)

    g_mB = alpha_mB[:, None] * draw_fading(rng, (m, f))
    g_kB = alpha_kB[:, None] * draw_fading(rng, (k, f))

    return ChannelState(
        alpha_mB=alpha_mB, alpha_kB=alpha_kB, alpha_k=alpha_k,
        alpha_mk=alpha_mk, alpha_kk=alpha_kk, g_mB=g_mB, g_kB=g_kB,
        sigma2_bs=config.sigma2_bs_mw, sigma2_veh=config.sigma2_veh_mw)


def resample_bs_fading(cs: ChannelState,
                       rng: np.random.Generator) -> ChannelState:
    """Fresh BS-side fast fading on the same large-scale state."""
    g_mB = cs.alpha_mB[:, None] * draw_fading(rng, cs.g_mB.shape)
    g_kB = cs.alpha_kB[:, None] * draw_fading(rng, cs.g_kB.shape)
    return replace(cs, g_mB=g_mB, g_kB=g_kB)


def dump_alpha_csv(cs: ChannelState, outdir: str) -> list[str]:
    """Debug dump of the alpha matrices, one CSV per matrix."""
    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    mats = {
        "alpha_mB": cs.alpha_mB[:, None], "alpha_kB": cs.alpha_kB[:, None],
        "alpha_k": cs.alpha_k[:, None], "alpha_mk": cs.alpha_mk,
        "alpha_kk": cs.alpha_kk,
    }
    for name, mat in mats.items():
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in np.atleast_2d(mat):
                writer.writerow([repr(float(x)) for x in row])
        written.append(str(path))
    return written
