"""Pathloss laws, shadowing/fading statistics, and channel realization."""

import math

import numpy as np
import pytest

from v2xalloc.channel import (
    ChannelState,
    draw_fading,
    dump_alpha_csv,
    large_scale_gain,
    pathloss_v2i_db,
    pathloss_v2v_db,
    realize_channels,
    resample_bs_fading,
)
from v2xalloc.scenario import ScenarioConfig, Topology

D_BP_2GHZ = 20.0 / 3.0   # 4*(1.5-1)^2*2e9/3e8


def manual_topology(pos, v2i, pairs):
    pos = np.asarray(pos, dtype=float)
    n = len(pos)
    return Topology(lane=np.zeros(n, dtype=int), pos=pos,
                    direction=np.ones(n, dtype=int),
                    v2i_tx=np.asarray(v2i, dtype=int),
                    v2v_pairs=np.asarray(pairs, dtype=int).reshape(-1, 2))


# -- V2I pathloss -----------------------------------------------------------

def test_v2i_pathloss_values():
    assert abs(pathloss_v2i_db(1.0) - 128.1) < 1e-12
    assert abs(pathloss_v2i_db(0.5) - 116.7812721630) < 1e-6
    assert abs(pathloss_v2i_db(0.1) - 90.5) < 1e-9


def test_v2i_pathloss_rejects_nonpositive():
    for d in (0.0, -1.0):
        with pytest.raises(ValueError):
            pathloss_v2i_db(d)


# -- V2V pathloss -----------------------------------------------------------

def test_v2v_near_slope_value():
    assert abs(pathloss_v2v_db(5.0, 2.0) - 48.9078189250) < 1e-6


def test_v2v_far_slope_values():
    assert abs(pathloss_v2v_db(10.0, 2.0) - 58.7875786082) < 1e-6
    assert abs(pathloss_v2v_db(100.0, 2.0) - 98.7875786082) < 1e-6
    # exactly 40 dB per decade beyond the breakpoint
    assert abs(pathloss_v2v_db(100.0, 2.0)
               - pathloss_v2v_db(10.0, 2.0) - 40.0) < 1e-9


def test_v2v_continuous_at_breakpoint():
    lo = pathloss_v2v_db(D_BP_2GHZ * (1.0 - 1e-12), 2.0)
    hi = pathloss_v2v_db(D_BP_2GHZ * (1.0 + 1e-12), 2.0)
    assert abs(lo - hi) < 1e-9


def test_v2v_other_carrier():
    # breakpoint scales with fc; 5 GHz drops the 20*log10(fc/5) offset
    assert abs(pathloss_v2v_db(5.0, 5.0) - 56.8666190984) < 1e-6
    d_bp5 = 50.0 / 3.0
    lo = pathloss_v2v_db(d_bp5 * (1.0 - 1e-12), 5.0)
    hi = pathloss_v2v_db(d_bp5 * (1.0 + 1e-12), 5.0)
    assert abs(lo - hi) < 1e-9


def test_v2v_clamped_below_3m():
    ref = pathloss_v2v_db(3.0, 2.0)
    assert pathloss_v2v_db(1.0, 2.0) == ref
    assert pathloss_v2v_db(2.9, 2.0) == ref
    assert abs(ref - 43.8718523087) < 1e-6


def test_v2v_monotone_in_distance():
    for d in (3.0, 4.0, 5.0, 6.0, D_BP_2GHZ, 8.0, 10.0, 25.0, 100.0):
        assert pathloss_v2v_db(2.0 * d, 2.0) > pathloss_v2v_db(d, 2.0)


def test_v2v_rejects_bad_inputs():
    with pytest.raises(ValueError):
        pathloss_v2v_db(0.0, 2.0)
    with pytest.raises(ValueError):
        pathloss_v2v_db(10.0, 0.0)
    with pytest.raises(ValueError):
        pathloss_v2v_db(10.0, 2.0, tx_height_m=1.0)
    with pytest.raises(ValueError):
        pathloss_v2v_db(10.0, 2.0, rx_height_m=0.9)


# -- gain / shadowing / fading ----------------------------------------------

def test_large_scale_gain_budget():
    assert abs(large_scale_gain(100.0, 0.0, 0.0) - 1e-10) < 1e-22
    ratio = large_scale_gain(100.0, 0.0, 0.0) / large_scale_gain(100.0, 8.0, 0.0)
    assert abs(ratio - 10.0 ** 0.8) < 1e-9


def test_shadowing_std_propagates():
    rng = np.random.default_rng(0)
    shadows = rng.normal(0.0, 8.0, size=10_000)
    alphas = np.array([large_scale_gain(100.0, s, 0.0) for s in shadows])
    std_db = float(np.std(10.0 * np.log10(alphas)))
    assert abs(std_db - 8.0) < 0.2


def test_fading_statistics():
    rng = np.random.default_rng(1)
    h2 = draw_fading(rng, size=1_000_000)
    assert np.all(h2 >= 0.0)
    assert abs(float(np.mean(h2)) - 1.0) < 0.005
    frac = float(np.mean(h2 <= 0.1))
    assert abs(frac - (1.0 - math.exp(-0.1))) < 0.003


# -- realize_channels ---------------------------------------------------------

def test_realize_shapes_and_positivity():
    cfg = ScenarioConfig(m_v2i=3, k_v2v=6)
    from v2xalloc.scenario import generate_topology
    topo = generate_topology(cfg, np.random.default_rng(2))
    cs = realize_channels(topo, cfg, np.random.default_rng(3))
    assert cs.alpha_mB.shape == (3,) and cs.alpha_kB.shape == (6,)
    assert cs.alpha_k.shape == (6,)
    assert cs.alpha_mk.shape == (3, 6) and cs.alpha_kk.shape == (6, 6)
    assert np.all(np.diag(cs.alpha_kk) == 0.0)
    assert cs.g_mB.shape == (3, 3) and cs.g_kB.shape == (6, 3)  # F = M
    for arr in (cs.alpha_mB, cs.alpha_kB, cs.alpha_k, cs.alpha_mk,
                cs.g_mB, cs.g_kB):
        assert np.all(arr > 0.0)
    assert abs(cs.sigma2_bs - cfg.sigma2_bs_mw) < 1e-25
    assert abs(cs.sigma2_veh - cfg.sigma2_veh_mw) < 1e-25


def test_alpha_from_geometry_without_shadowing():
    # one V2I vehicle at (0, 35) plus its receiver 10 m along the lane
    cfg = ScenarioConfig(m_v2i=1, k_v2v=1,
                         shadow_std_v2i_db=0.0, shadow_std_v2v_db=0.0)
    topo = manual_topology([(0.0, 35.0), (10.0, 35.0)], [0], [(0, 1)])
    cs = realize_channels(topo, cfg, np.random.default_rng(0))
    d3d_km = math.sqrt(35.0 ** 2 + (25.0 - 1.5) ** 2) / 1000.0
    want_bs = 10.0 ** ((8.0 + 3.0 - pathloss_v2i_db(d3d_km)) / 10.0)
    want_vv = 10.0 ** ((3.0 + 3.0 - pathloss_v2v_db(10.0, 2.0)) / 10.0)
    assert abs(cs.alpha_mB[0] - want_bs) / want_bs < 1e-12
    assert abs(cs.alpha_kB[0] - want_bs) / want_bs < 1e-12
    assert abs(cs.alpha_k[0] - want_vv) / want_vv < 1e-12
    assert abs(cs.alpha_mk[0, 0] - want_vv) / want_vv < 1e-12


def test_realize_is_deterministic():
    cfg = ScenarioConfig(m_v2i=2, k_v2v=4, n_clusters=2)
    from v2xalloc.scenario import generate_topology
    topo = generate_topology(cfg, np.random.default_rng(4))
    a = realize_channels(topo, cfg, np.random.default_rng(9))
    b = realize_channels(topo, cfg, np.random.default_rng(9))
    assert np.array_equal(a.alpha_kk, b.alpha_kk)
    assert np.array_equal(a.g_mB, b.g_mB)


def test_bs_fading_unit_mean_and_rb_independence():
    cfg = ScenarioConfig(m_v2i=2, k_v2v=2, n_clusters=2,
                         shadow_std_v2i_db=0.0, shadow_std_v2v_db=0.0)
    topo = manual_topology([(0.0, 35.0), (40.0, 35.0), (20.0, 39.0)],
                           [0, 1], [(0, 2), (1, 2)])
    cs0 = realize_channels(topo, cfg, np.random.default_rng(5))
    rng = np.random.default_rng(6)
    n = 4000
    ratios = np.empty((n, 2, 2))
    for i in range(n):
        cs = resample_bs_fading(cs0, rng)
        ratios[i] = cs.g_mB / cs.alpha_mB[:, None]
        assert cs.alpha_mB is cs0.alpha_mB         # large scale untouched
    assert abs(float(ratios.mean()) - 1.0) < 0.05  # E[g] = alpha
    corr = np.corrcoef(ratios[:, 0, 0], ratios[:, 0, 1])[0, 1]
    assert abs(corr) < 0.06                        # per-RB fading independent


def test_dump_alpha_csv(tmp_path):
    cfg = ScenarioConfig(m_v2i=2, k_v2v=4, n_clusters=2)
    from v2xalloc.scenario import generate_topology
    topo = generate_topology(cfg, np.random.default_rng(2))
    cs = realize_channels(topo, cfg, np.random.default_rng(2))
    paths = dump_alpha_csv(cs, str(tmp_path))
    assert len(paths) == 5
    rows = (tmp_path / "alpha_kk.csv").read_text().strip().split("\n")
    assert len(rows) == 4
