"""Freeway drop geometry, link selection, and simulation configuration.

Single-cell setup: base station at the origin, a multi-lane highway strip
running parallel to the x axis at a configurable standoff.  Vehicles are
dropped per lane with exponential inter-vehicle gaps (spatial Poisson
process) whose mean is speed-dependent: E[gap] = 2.5 * v [m] with v in m/s.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

# How many times a drop may be re-drawn before giving up when the strip
# does not contain enough vehicles for the requested link counts.
MAX_DROP_RETRIES = 100


@dataclass
class ScenarioConfig:
    """All simulation knobs, in natural input units (dB, dBm, km/h, GHz).

    Defaults reproduce the single-cell freeway evaluation setup: 2 GHz
    carrier, 10 MHz / 10 resource blocks, 500 m cell radius, six 4 m lanes
    35 m from the base station, 70 km/h traffic.
    """

    carrier_freq_ghz: float = 2.0
    bandwidth_mhz: float = 10.0
    cell_radius_m: float = 500.0
    bs_height_m: float = 25.0
    bs_gain_dbi: float = 8.0
    bs_noise_figure_db: float = 5.0
    bs_to_highway_m: float = 35.0
    veh_height_m: float = 1.5
    veh_gain_dbi: float = 3.0
    veh_noise_figure_db: float = 9.0
    speed_kmh: float = 70.0
    lanes_per_direction: int = 3
    lane_width_m: float = 4.0
    gamma0_db: float = 5.0          # V2V SINR target
    p0: float = 0.01                # V2V outage budget
    m_v2i: int = 10                 # number of V2I links (= resource blocks)
    k_v2v: int = 30                 # number of V2V links
    n_clusters: int | None = None   # V2V clusters; defaults to m_v2i
    pmax_c_dbm: float = 23.0        # V2I transmit power cap
    pmax_d_dbm: float = 23.0        # V2V transmit power cap
    noise_dbm: float = -114.0       # thermal noise before noise figure
    shadow_std_v2i_db: float = 8.0
    shadow_std_v2v_db: float = 3.0
    seed: int = 1
    drops: int = 100
    fading_samples: int = 100       # mobile-side fading draws per allocation
    bs_fading_realizations: int = 1  # BS-side fast-fading redraws per drop

    def __post_init__(self):
        if self.n_clusters is None:
            self.n_clusters = self.m_v2i

    # -- derived quantities, linear units -------------------------------

    @property
    def speed_ms(self) -> float:
        return self.speed_kmh / 3.6

    @property
    def mean_gap_m(self) -> float:
        """Mean inter-vehicle gap, 2.5 s headway at the configured speed."""
        return 2.5 * self.speed_ms

    @property
    def n_rb(self) -> int:
        """Resource blocks; one per V2I link."""
        return self.m_v2i

    @property
    def gamma0(self) -> float:
        return 10.0 ** (self.gamma0_db / 10.0)

    @property
    def pmax_c_mw(self) -> float:
        return 10.0 ** (self.pmax_c_dbm / 10.0)

    @property
    def pmax_d_mw(self) -> float:
        return 10.0 ** (self.pmax_d_dbm / 10.0)

    @property
    def sigma2_bs_mw(self) -> float:
        """Receiver noise power at the BS (thermal + noise figure), mW."""
        return 10.0 ** ((self.noise_dbm + self.bs_noise_figure_db) / 10.0)

    @property
    def sigma2_veh_mw(self) -> float:
        """Receiver noise power at a vehicle (thermal + noise figure), mW."""
        return 10.0 ** ((self.noise_dbm + self.veh_noise_figure_db) / 10.0)

    def validate(self) -> None:
        """Raise ValueError on any out-of-domain knob."""
        if self.m_v2i < 1:
            raise ValueError("m_v2i must be >= 1")
        if self.k_v2v < 1:
            raise ValueError("k_v2v must be >= 1")
        if not 1 <= self.n_clusters <= self.k_v2v:
            raise ValueError("n_clusters must be in [1, k_v2v]")
        if not 0.0 < self.p0 < 1.0:
            raise ValueError("p0 must lie strictly inside (0, 1)")
        if self.speed_kmh <= 0:
            raise ValueError("speed_kmh must be positive")
        if self.carrier_freq_ghz <= 0:
            raise ValueError("carrier_freq_ghz must be positive")
        if not 0 < self.bs_to_highway_m < self.cell_radius_m:
            raise ValueError("need 0 < bs_to_highway_m < cell_radius_m")
        if self.lanes_per_direction < 1 or self.lane_width_m <= 0:
            raise ValueError("bad lane geometry")
        if self.veh_height_m <= 1.0:
            raise ValueError("veh_height_m must exceed 1 m")
        if self.drops < 1 or self.fading_samples < 1:
            raise ValueError("drops and fading_samples must be >= 1")
        if self.bs_fading_realizations < 1:
            raise ValueError("bs_fading_realizations must be >= 1")
        for name in ("pmax_c_dbm", "pmax_d_dbm", "noise_dbm", "gamma0_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


# -- plain-text config round-trip ---------------------------------------

def config_to_text(config: ScenarioConfig) -> str:
    """Serialize as `key = value` lines, one per field."""
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        lines.append(f"{f.name} = {getattr(config, f.name)!r}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment, blanks ignored."""
    known = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in known:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, val, known[key].type)
    return out


def _coerce(key: str, val: str, ann) -> int | float | None:
    ann = str(ann)
    try:
        if val == "None":
            return None
        if "int" in ann and "float" not in ann:
            return int(val)
        return float(val)
    except ValueError as e:
        raise ValueError(f"config key {key!r}: cannot parse {val!r}") from e


def load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    """Read a config file, apply overrides, validate."""
    with open(path) as fh:
        values = parse_config_text(fh.read())
    if overrides:
        values.update(overrides)
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg


# -- topology ------------------------------------------------------------

@dataclass
class Topology:
    """One drop: vehicle placement plus selected V2I/V2V links.

    Vehicle i sits at ``pos[i] = (x, y)`` with the BS at the origin.
    ``v2i_tx[m]`` is the vehicle id carrying V2I link m; ``v2v_pairs[k]``
    is the (tx, rx) vehicle pair of V2V link k.  V2V transmitters are
    always V2I vehicles (each uplink vehicle also runs sidelinks).
    """

    lane: np.ndarray                 # (V,) int
    pos: np.ndarray                  # (V, 2) float, metres
    direction: np.ndarray            # (V,) +1 / -1
    v2i_tx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    v2v_pairs: np.ndarray = field(
        default_factory=lambda: np.empty((0, 2), dtype=int))
    bs_pos: tuple[float, float] = (0.0, 0.0)

    @property
    def n_vehicles(self) -> int:
        return len(self.lane)


def drop_vehicles(config: ScenarioConfig, rng: np.random.Generator) -> Topology:
    """Drop vehicles on the highway strip inside the cell footprint.

    Per lane, successive gaps are Exp(mean_gap_m); the strip spans the
    chord of the cell circle at the lane's y offset.  Redraws the whole
    drop when fewer than m_v2i + k_v2v vehicles land.
    """
    n_lanes = 2 * config.lanes_per_direction
    need = config.m_v2i + config.k_v2v
    for _ in range(MAX_DROP_RETRIES):
        lanes, xs, ys, dirs = [], [], [], []
        for lane in range(n_lanes):
            y = config.bs_to_highway_m + (lane + 0.5) * config.lane_width_m
            if y >= config.cell_radius_m:
                continue  # lane falls outside the cell entirely
            half = math.sqrt(config.cell_radius_m ** 2 - y ** 2)
            direction = 1 if lane < config.lanes_per_direction else -1
            x = -half + rng.exponential(config.mean_gap_m)
            while x <= half:
                lanes.append(lane)
                xs.append(x)
                ys.append(y)
                dirs.append(direction)
                x += rng.exponential(config.mean_gap_m)
        if len(xs) >= need:
            return Topology(
                lane=np.array(lanes, dtype=int),
                pos=np.column_stack([np.array(xs), np.array(ys)]),
                direction=np.array(dirs, dtype=int),
            )
    raise ValueError(
        f"could not place {need} vehicles in {MAX_DROP_RETRIES} drops; "
        "check density/geometry settings")


def select_links(topology: Topology, config: ScenarioConfig,
                 rng: np.random.Generator) -> Topology:
    """Pick V2I transmitters and form V2V pairs; returns a new Topology.

    The m_v2i V2I vehicles are drawn uniformly without replacement.  Each
    of them transmits to its nearest non-V2I neighbours to form V2V
    links; a vehicle may receive several links (from different
    transmitters) but no (tx, rx) pair repeats.  Link counts are split
    as evenly as possible — the first k_v2v mod m_v2i transmitters, in
    ascending vehicle id, take one extra.  Distance ties break toward
    the lower vehicle id.
    """
    v = topology.n_vehicles
    m, k = config.m_v2i, config.k_v2v
    if v < m:
        raise ValueError("topology has fewer vehicles than V2I links")
    v2i = np.sort(rng.choice(v, size=m, replace=False))

    base, extra = divmod(k, m)
    quotas = [base + 1 if i < extra else base for i in range(m)]

    is_v2i = np.zeros(v, dtype=bool)
    is_v2i[v2i] = True
    pairs = []
    for tx, quota in zip(v2i, quotas):
        if quota == 0:
            continue
        d = np.hypot(topology.pos[:, 0] - topology.pos[tx, 0],
                     topology.pos[:, 1] - topology.pos[tx, 1])
        order = np.lexsort((np.arange(v), d))
        taken = 0
        for rx in order:
            if is_v2i[rx]:
                continue
            pairs.append((tx, rx))
            taken += 1
            if taken == quota:
                break
        if taken < quota:
            raise ValueError("not enough receiver candidates to form "
                             "the requested V2V links")
    return dataclasses.replace(
        topology,
        v2i_tx=np.asarray(v2i, dtype=int),
        v2v_pairs=np.array(pairs, dtype=int).reshape(k, 2),
    )


def generate_topology(config: ScenarioConfig,
                      rng: np.random.Generator) -> Topology:
    """drop_vehicles + select_links in one call."""
    return select_links(drop_vehicles(config, rng), config, rng)
