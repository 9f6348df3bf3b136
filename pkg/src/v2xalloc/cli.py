"""Command-line front end.

    v2xalloc simulate --out results/ [--config FILE] [--drops 200] ...
    v2xalloc allocate-once --out snapshot/ [--drop 3] [--dump-channels]
    v2xalloc selftest [--suite power] [--instances 50]

`simulate` writes CDF/summary CSVs plus a manifest that can be fed back
through --config to reproduce the run byte for byte.  `allocate-once`
dumps one drop's allocation decision for inspection.  `selftest` runs
the randomized verification suites against the oracles.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .channel import dump_alpha_csv, realize_channels
from .montecarlo import _substream, run_monte_carlo, write_outputs
from .oracles import ALL_SUITES, matching_suite
from .pipeline import allocate, audit_allocation
from .scenario import ScenarioConfig, generate_topology, load_config


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group(
        "scenario overrides", "override any config-file field")
    for f in dataclasses.fields(ScenarioConfig):
        ann = str(f.type)
        typ = int if ("int" in ann and "float" not in ann) else float
        group.add_argument(f"--{f.name.replace('_', '-')}",
                           dest=f.name, type=typ, default=None,
                           metavar="X", help=argparse.SUPPRESS)


def _config_from_args(args) -> ScenarioConfig:
    overrides = {}
    for f in dataclasses.fields(ScenarioConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            if str(f.type).startswith("int"):
                val = int(val)
            overrides[f.name] = val
    if args.config:
        return load_config(args.config, overrides)
    cfg = ScenarioConfig(**overrides)
    cfg.validate()
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2xalloc",
        description="spectrum/power allocation simulator for cellular "
                    "V2X with D2D sidelinks")
    parser.add_argument("--version", action="version",
                        version=f"v2xalloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate",
                           help="Monte-Carlo evaluation, CSV outputs")
    p_sim.add_argument("--config", help="config file (key = value lines; "
                                        "a previous run's manifest works)")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--threads", type=int,
                       default=os.cpu_count() or 1,
                       help="worker processes, default = logical cores "
                            "(results are identical for any value)")
    _add_config_flags(p_sim)

    p_once = sub.add_parser("allocate-once",
                            help="run one drop and dump the decision")
    p_once.add_argument("--config")
    p_once.add_argument("--out", required=True)
    p_once.add_argument("--drop", type=int, default=0,
                        help="drop index to realize")
    p_once.add_argument("--dump-channels", action="store_true",
                        help="also write the large-scale gain matrices")
    _add_config_flags(p_once)

    p_self = sub.add_parser("selftest",
                            help="randomized verification suites")
    p_self.add_argument("--suite", default="all",
                        choices=["all"] + sorted(ALL_SUITES),
                        help="which suite to run")
    p_self.add_argument("--instances", type=int, default=None,
                        help="instance count per suite (default: "
                             "acceptance-scale)")
    p_self.add_argument("--seed", type=int, default=None,
                        help="suite RNG seed")
    p_self.add_argument("--perturb-weights", action="store_true",
                        help="sabotage the matcher's weights; the "
                             "matching suite must then FAIL (negative "
                             "control for the harness itself)")
    return parser


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.perf_counter()
    data = run_monte_carlo(cfg, threads=max(1, args.threads))
    paths = write_outputs(data, args.out)
    dt = time.perf_counter() - t0
    print(f"simulated {cfg.drops} drops x {cfg.bs_fading_realizations} "
          f"realization(s) in {dt:.1f}s")
    print(f"mean sum capacity {np.mean(data.capacity):.3f} bit/s/Hz "
          f"(baseline {np.mean(data.baseline):.3f}), "
          f"empirical outage {data.outage:.5f} (budget {cfg.p0})")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_allocate_once(args) -> int:
    import csv
    import pathlib

    cfg = _config_from_args(args)
    topo = generate_topology(cfg, _substream(cfg, args.drop, 0))
    cs = realize_channels(topo, cfg, _substream(cfg, args.drop, 1))
    alloc = allocate(cs, cfg)
    problems = audit_allocation(alloc, cs, cfg)
    if problems:
        for p in problems:
            print(f"audit: {p}", file=sys.stderr)
        return 1

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    clusters = alloc.clustering.clusters()

    def dbm(p_mw: float) -> str:
        return repr(10.0 * math.log10(p_mw)) if p_mw > 0 else ""

    # one row per V2I link, one row per served V2V link, powers in dBm
    with open(out / "allocation.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["link_type", "id", "cluster", "rb", "power_dbm"])
        for m in range(cfg.m_v2i):
            rb = int(alloc.rb_of_v2i[m])
            w.writerow(["v2i", m, "", rb,
                        dbm(alloc.p_c[m]) if rb >= 0 else ""])
        for k in alloc.served_links:
            n = int(alloc.clustering.assignment[k])
            local = int(np.flatnonzero(clusters[n] == k)[0])
            w.writerow(["v2v", int(k), n, int(alloc.rb_of_v2v[k]),
                        dbm(float(alloc.p_d[n][local]))])
    print(f"drop {args.drop}: {len(alloc.matches)} matches, "
          f"sum capacity {alloc.total_weight:.3f} bit/s/Hz, "
          f"{len(alloc.served_links)}/{cfg.k_v2v} V2V links served")
    if args.dump_channels:
        for p in dump_alpha_csv(cs, args.out):
            print(f"wrote {p}")
    print(f"wrote {out / 'allocation.csv'}")
    return 0


COUNT_ARG = {"power": "n_instances", "tightness": "n_instances",
             "matching": "n_random", "ncut": "n_graphs",
             "lp": "n_instances"}


def _cmd_selftest(args) -> int:
    names = sorted(ALL_SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        kwargs = {}
        if args.instances is not None:
            kwargs[COUNT_ARG[name]] = args.instances
            if name == "matching":
                kwargs["n_adversarial"] = max(1, args.instances // 10)
        if args.seed is not None:
            kwargs["seed"] = args.seed
        if name == "matching" and args.perturb_weights:
            kwargs["perturb_weights"] = True
        res = ALL_SUITES[name](**kwargs)
        print(res.line())
        for msg in res.failures[:5]:
            print(f"    {msg}")
        if len(res.failures) > 5:
            print(f"    ... and {len(res.failures) - 5} more")
        failed = failed or not res.ok
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "allocate-once":
            return _cmd_allocate_once(args)
        return _cmd_selftest(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
