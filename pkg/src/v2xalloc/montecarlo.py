"""Monte-Carlo evaluation over vehicle drops.

Every random draw comes from a substream keyed by
SeedSequence(seed, spawn_key=(drop, purpose[, realization])), so results
are independent of worker count and merge order, and raising `drops`,
`fading_samples`, or `bs_fading_realizations` extends the sample set
without disturbing existing samples.

Purpose codes: 0 topology, 1 shadowing/BS fading of the drop,
2 BS fading redraws, 3 mobile-side fading, 4 baseline permutations.
"""

from __future__ import annotations

import math
import pathlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import ChannelState, realize_channels, resample_bs_fading
from .pipeline import Allocation, allocate
from .scenario import ScenarioConfig, config_to_text, generate_topology

OUTPUT_FILES = ("capacity_cdf.csv", "v2v_sinr_cdf.csv",
                "baseline_capacity_cdf.csv", "summary.csv", "manifest.txt")


def _substream(config: ScenarioConfig, *key: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=tuple(key)))


@dataclass
class CdfData:
    """Raw samples (drop-major order) plus summary statistics."""

    capacity: np.ndarray          # optimized sum capacity per realization
    baseline: np.ndarray          # random-assignment sum capacity
    sinr_db: np.ndarray           # served V2V SINR samples, dB
    outage: float                 # fraction of SINR samples below gamma0
    unserved_fraction: float      # mean fraction of V2V links left out
    config: ScenarioConfig
    wall_seconds: float = 0.0


def ecdf(values: np.ndarray):
    """Sorted samples and their empirical CDF heights."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return v, v
    return v, np.arange(1, len(v) + 1) / len(v)


def sample_v2v_sinr(alloc: Allocation, cs: ChannelState,
                    rng: np.random.Generator, count: int = 1):
    """Instantaneous SINR of every served V2V link, fresh mobile fading.

    Returns (served_ids, sinr) with sinr of shape (count, n_served),
    linear scale.  Fading is drawn in one fixed-order batch — desired
    links, V2I interferers, then V2V cross pairs — so a longer run's
    first rows coincide with a shorter run's.
    """
    served = alloc.served_links
    ns = len(served)
    if ns == 0:
        return served, np.zeros((count, 0))
    clusters = alloc.clustering.clusters()
    m_of_rb = {f: m for m, f, _ in alloc.matches}

    sig_coef = np.empty(ns)
    v2i_coef = np.empty(ns)
    pair_coef: list[float] = []
    pair_rx: list[int] = []
    for idx, k in enumerate(served):
        n = int(alloc.clustering.assignment[k])
        links = clusters[n]
        local = int(np.flatnonzero(links == k)[0])
        m = m_of_rb[int(alloc.rb_of_v2v[k])]
        sig_coef[idx] = alloc.p_d[n][local] * cs.alpha_k[k]
        v2i_coef[idx] = alloc.p_c[m] * cs.alpha_mk[m, k]
        for j, other in enumerate(links):
            if other == k:
                continue
            pair_coef.append(alloc.p_d[n][j] * cs.alpha_kk[other, k])
            pair_rx.append(idx)
    pair_coef = np.asarray(pair_coef)
    pair_rx = np.asarray(pair_rx, dtype=int)

    draws = rng.exponential(1.0, size=(count, 2 * ns + len(pair_coef)))
    e_sig = draws[:, :ns]
    e_v2i = draws[:, ns:2 * ns]
    e_pair = draws[:, 2 * ns:]

    interf = cs.sigma2_veh + v2i_coef * e_v2i
    if len(pair_coef):
        cross = np.zeros((count, ns))
        for col in range(len(pair_coef)):
            cross[:, pair_rx[col]] += pair_coef[col] * e_pair[:, col]
        interf = interf + cross
    return served, sig_coef * e_sig / interf


def random_assignment_capacity(capacity_table: np.ndarray,
                               rng: np.random.Generator) -> float:
    """Baseline: pair each RB with a uniformly random V2I link and
    cluster (random permutations), score only feasible triples."""
    m_count, n_count, f_count = capacity_table.shape
    sigma = rng.permutation(m_count)
    tau = rng.permutation(n_count)
    total = 0.0
    for f in range(f_count):
        if f >= m_count or f >= n_count:
            continue
        c = capacity_table[sigma[f], tau[f], f]
        if np.isfinite(c):
            total += float(c)
    return total


def simulate_drop(config: ScenarioConfig, drop: int):
    """All realizations of one vehicle drop.

    Returns (capacity, baseline, sinr_db, unserved_fraction) arrays for
    this drop; deterministic in (config.seed, drop) alone.
    """
    topo = generate_topology(config, _substream(config, drop, 0))
    cs0 = realize_channels(topo, config, _substream(config, drop, 1))
    caps, base, sinrs, unserved = [], [], [], []
    for r in range(config.bs_fading_realizations):
        cs = cs0 if r == 0 else resample_bs_fading(
            cs0, _substream(config, drop, 2, r))
        alloc = allocate(cs, config)
        caps.append(alloc.total_weight)
        base.append(random_assignment_capacity(
            alloc.capacity_table, _substream(config, drop, 4, r)))
        _, sinr = sample_v2v_sinr(
            alloc, cs, _substream(config, drop, 3, r),
            count=config.fading_samples)
        sinrs.append(sinr.ravel())
        unserved.append(1.0 - len(alloc.served_links) / config.k_v2v)
    sinr_all = (np.concatenate(sinrs) if sinrs else np.zeros(0))
    with np.errstate(divide="ignore"):
        sinr_db = 10.0 * np.log10(sinr_all)
    return (np.asarray(caps), np.asarray(base), sinr_db,
            float(np.mean(unserved)))


def run_monte_carlo(config: ScenarioConfig, threads: int = 1,
                    progress=None) -> CdfData:
    """Simulate config.drops independent drops, optionally in parallel.

    Results are merged in drop order, so the output is identical for
    every `threads` value.
    """
    config.validate()
    start = time.perf_counter()
    drops = list(range(config.drops))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_drop_worker,
                                    [(config, d) for d in drops],
                                    chunksize=max(1, len(drops) // (4 * threads))))
    else:
        results = []
        for d in drops:
            results.append(simulate_drop(config, d))
            if progress is not None:
                progress(d + 1, len(drops))

    capacity = np.concatenate([r[0] for r in results])
    baseline = np.concatenate([r[1] for r in results])
    sinr_db = np.concatenate([r[2] for r in results])
    unserved = float(np.mean([r[3] for r in results]))
    gamma0_db = config.gamma0_db
    outage = float(np.mean(sinr_db < gamma0_db)) if len(sinr_db) else 0.0
    return CdfData(capacity=capacity, baseline=baseline, sinr_db=sinr_db,
                   outage=outage, unserved_fraction=unserved,
                   config=config,
                   wall_seconds=time.perf_counter() - start)


def _drop_worker(args):
    return simulate_drop(*args)


# -- CSV outputs ----------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _write_cdf_csv(path: pathlib.Path, header: str,
                   values: np.ndarray) -> None:
    v, c = ecdf(values)
    with open(path, "w", newline="") as fh:
        fh.write(f"{header},cdf\n")
        for val, cum in zip(v, c):
            fh.write(f"{_fmt(val)},{_fmt(cum)}\n")


def write_outputs(data: CdfData, outdir: str) -> list[str]:
    """Write the CDF/summary CSVs and the reproducibility manifest."""
    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = data.config

    _write_cdf_csv(out / "capacity_cdf.csv", "value_bps_hz", data.capacity)
    _write_cdf_csv(out / "v2v_sinr_cdf.csv", "sinr_db", data.sinr_db)
    _write_cdf_csv(out / "baseline_capacity_cdf.csv", "value_bps_hz",
                   data.baseline)

    summary = [
        ("drops", cfg.drops),
        ("bs_fading_realizations", cfg.bs_fading_realizations),
        ("fading_samples", cfg.fading_samples),
        ("seed", cfg.seed),
        ("gamma0_db", cfg.gamma0_db),
        ("p0", cfg.p0),
        ("empirical_outage", _fmt(data.outage)),
        ("mean_sum_capacity", _fmt(float(np.mean(data.capacity)))),
        ("median_sum_capacity", _fmt(float(np.median(data.capacity)))),
        ("mean_baseline_capacity", _fmt(float(np.mean(data.baseline)))),
        ("unserved_v2v_fraction", _fmt(data.unserved_fraction)),
        ("n_capacity_samples", len(data.capacity)),
        ("n_sinr_samples", len(data.sinr_db)),
    ]
    with open(out / "summary.csv", "w", newline="") as fh:
        fh.write("key,value\n")
        for k, v in summary:
            fh.write(f"{k},{v}\n")

    with open(out / "manifest.txt", "w") as fh:
        fh.write("# v2xalloc run manifest; feed back via --config to "
                 "reproduce byte-identical outputs\n")
        fh.write(f"# version: {__version__}\n")
        fh.write(f"# outputs: {', '.join(OUTPUT_FILES[:-1])}\n")
        fh.write(f"# wall_seconds: {data.wall_seconds:.3f}\n")
        fh.write(config_to_text(cfg))
    return [str(out / name) for name in OUTPUT_FILES]
