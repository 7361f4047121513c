"""Fixed-step simulation of one satellite pass, and parameter-sweep campaigns.

Time runs on an integer millisecond grid so that TTT, T310 and the handover
timer compare exactly. A drop is fully determined by its configuration, the
seeds and the drop index.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

import numpy as np

from . import channel as ch
from .errors import ConfigError
from .geometry import (
    DEFAULT_CELL_RADIUS_M,
    ConstellationConfig,
    along_track_positions,
    link_geometry,
)
from .handover import (
    MECHANISM_ORDER,
    AssociationState,
    HoMechanism,
    Measurement,
    evaluate,
    initial_association,
    make_mechanism,
)
from .mobility import MobilityConfig, MobilityMode, init_users, step as mobility_step
from .monitor import (
    MetricsRecord,
    PingPongTracker,
    RlfMonitor,
    aggregate,
    record_handover,
    update_rlf,
)


HORIZON_GRID_MS = 10


class Purpose(enum.IntEnum):
    PLACEMENT = 0
    MOBILITY = 1
    SHADOW_LOS = 2
    SHADOW_NLOS = 3
    FAST_LOS = 4
    FAST_NLOS = 5


def seeded_stream(base_seed: int, drop: int, user: int | None, purpose: Purpose) -> np.random.Generator:
    """Independent generator for one (drop, user, purpose) key.

    ``user=None`` selects the drop-wide stream of that purpose, used where
    draws are vectorized over all users.
    """
    if base_seed < 0 or drop < 0 or (user is not None and user < 0):
        raise ConfigError("seeds, drop and user indices must be non-negative")
    user_key = 0 if user is None else user + 1
    seq = np.random.SeedSequence(base_seed, spawn_key=(int(Purpose(purpose)), drop, user_key))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SimConfig:
    mechanism: HoMechanism = Measurement(3.0, 20)
    constellation: ConstellationConfig = ConstellationConfig()
    channel: ch.ChannelConfig = ch.ChannelConfig()
    mobility: MobilityConfig = MobilityConfig()
    step_ms: int = 10
    drops: int = 4
    users_per_drop: int = 1963
    base_seed: int = 0
    channel_seed: int | None = None
    cell_radius: float = DEFAULT_CELL_RADIUS_M
    q_in: float = -6.0
    q_out: float = -8.0
    t310_ms: int = 500
    pingpong_window: float = 5.0

    def __post_init__(self):
        if self.step_ms <= 0 or int(self.step_ms) != self.step_ms:
            raise ConfigError(f"step_ms must be a positive integer, got {self.step_ms}")
        if isinstance(self.mechanism, Measurement) and self.mechanism.ttt % self.step_ms:
            raise ConfigError(f"ttt {self.mechanism.ttt} ms is not a multiple of step_ms {self.step_ms}")
        if self.t310_ms % self.step_ms:
            raise ConfigError(f"t310 {self.t310_ms} ms is not a multiple of step_ms {self.step_ms}")
        if not self.q_in > self.q_out:
            raise ConfigError(f"q_in ({self.q_in}) must exceed q_out ({self.q_out})")
        if self.drops < 1 or self.users_per_drop < 1:
            raise ConfigError("drops and users_per_drop must be >= 1")
        if self.base_seed < 0 or (self.channel_seed is not None and self.channel_seed < 0):
            raise ConfigError("seeds must be non-negative")
        if self.pingpong_window <= 0:
            raise ConfigError("pingpong_window must be > 0")
        if self.cell_radius <= 0:
            raise ConfigError("cell_radius must be > 0")
        if self.mobility.cell_radius != self.cell_radius:
            object.__setattr__(self, "mobility", replace(self.mobility, cell_radius=self.cell_radius))
        if self.n_steps < 1:
            raise ConfigError("the pass is shorter than one step")

    @property
    def horizon_ms(self) -> int:
        """Last simulated instant: the pass end rounded down to the 10 ms grid.

        Sharing the horizon across step sizes keeps runs at 5, 10 or 20 ms
        comparable event for event.
        """
        grid = HORIZON_GRID_MS
        return int(math.floor(self.constellation.sim_duration * 1000.0 / grid + 1e-9)) * grid

    @property
    def n_steps(self) -> int:
        """Number of steps after t = 0 that fit inside the horizon."""
        return self.horizon_ms // self.step_ms

    @property
    def mobility_label(self) -> str:
        return "static" if self.mobility.mode is MobilityMode.STATIC else "mobile"


class Event(NamedTuple):
    time: float
    drop: int
    ue: int
    kind: str  # "handover", "pingpong_handover" or "rlf"
    source: int
    target: int


@dataclass
class DropResult:
    metrics: MetricsRecord
    events: list[Event] | None = field(default=None, repr=False)


class _Channel:
    """Per-drop link evaluation with the drop's shadow-fading draws."""

    def __init__(self, config: SimConfig, drop: int, n_users: int):
        self.cfg = config.channel
        self.altitude = config.constellation.altitude
        self.constellation = config.constellation
        seed = config.base_seed if config.channel_seed is None else config.channel_seed
        n_sat = config.constellation.num_satellites
        self.n_sat = n_sat
        # one extra column per draw is the UE's component shared by all satellites
        self.shape = (n_users, n_sat + 1)
        self.z_los = self._correlate(
            seeded_stream(seed, drop, None, Purpose.SHADOW_LOS).standard_normal(self.shape)
        )
        self.z_nlos = self._correlate(
            seeded_stream(seed, drop, None, Purpose.SHADOW_NLOS).standard_normal(self.shape)
        )
        self.fast = self.cfg.shadow_fading_mode is ch.ShadowFadingMode.PER_STEP
        if self.fast:
            f = self.cfg.sf_fast_fraction
            rho = self.cfg.sf_satellite_correlation
            self.fast_los = seeded_stream(seed, drop, None, Purpose.FAST_LOS)
            self.fast_nlos = seeded_stream(seed, drop, None, Purpose.FAST_NLOS)
            # correlation and mixing folded into one (n_sat + 1, n_sat) matrix
            mix = np.zeros((n_sat + 1, n_sat))
            mix[:n_sat] = math.sqrt(1.0 - rho) * np.eye(n_sat)
            mix[n_sat] = math.sqrt(rho)
            self.fast_matrix = math.sqrt(f) * mix
            self.slow_los = math.sqrt(1.0 - f) * self.z_los
            self.slow_nlos = math.sqrt(1.0 - f) * self.z_nlos
        self.eirp = ch.eirp_per_prb_dbm(self.cfg)
        self.pl_const = 32.45 + 20.0 * math.log10(self.cfg.carrier_frequency) + ch.scintillation_loss(self.cfg.p_fluc)

    def _correlate(self, z):
        return ch.correlate_across_satellites(
            z[:, : self.n_sat], z[:, self.n_sat], self.cfg.sf_satellite_correlation
        )

    def sample(self, t: float, x: np.ndarray, y: np.ndarray, fast: bool = True):
        """Return ``(rss, distance, elevation)`` arrays shaped (n_users, n_sat).

        ``fast=False`` leaves out the per-step part of the fading without
        consuming draws, which is what an averaged measurement would see.
        """
        sat_x = along_track_positions(self.constellation, t)
        elev, dist = link_geometry(x[:, None], y[:, None], sat_x[None, :], self.altitude)
        p_los, sig_los, sig_nlos, clutter = ch.environment_params(
            elev, self.cfg.environment_lookup, self.cfg.environment
        )
        z_los, z_nlos = self.z_los, self.z_nlos
        if self.fast:
            z_los, z_nlos = self.slow_los, self.slow_nlos
            if fast:
                z_los = z_los + self.fast_los.standard_normal(self.shape) @ self.fast_matrix
                z_nlos = z_nlos + self.fast_nlos.standard_normal(self.shape) @ self.fast_matrix
        # the LoS weights sum to one, so FSPL comes out of both branches
        pl = 20.0 * np.log10(dist)
        pl += self.pl_const
        pl += p_los * (sig_los * z_los)
        pl += (1.0 - p_los) * (sig_nlos * z_nlos + clutter)
        return self.eirp - pl, dist, elev


def run_drop(config: SimConfig, drop_index: int, record_events: bool = False) -> DropResult:
    """Simulate one seeded drop and return its handover, ping-pong and RLF counts.

    After an RLF the UE re-establishes on its serving satellite with fresh
    T310 and TTT state; the re-establishment is not a handover.
    """
    n = config.users_per_drop
    n_sat = config.constellation.num_satellites
    seed = config.base_seed
    mob = config.mobility
    mobile = mob.mode is not MobilityMode.STATIC

    user_rngs = (
        [seeded_stream(seed, drop_index, i, Purpose.MOBILITY) for i in range(n)] if mobile else None
    )
    users = init_users(
        n, config.cell_radius, seeded_stream(seed, drop_index, None, Purpose.PLACEMENT), mob, user_rngs
    )
    link = _Channel(config, drop_index, n)

    # initial selection sees averaged RSS, not one step's fast fading
    rss, dist, elev = link.sample(0.0, users.x, users.y, fast=False)
    state = AssociationState.start(
        initial_association(config.mechanism, rss=rss, distance=dist, elevation=elev), n_sat
    )
    monitor = RlfMonitor.create(n, config.q_in, config.q_out, config.t310_ms)
    tracker = PingPongTracker.create(n, config.pingpong_window)
    events: list[Event] | None = [] if record_events else None

    dt_ms = config.step_ms
    dt = dt_ms / 1000.0
    hos = pps = rlfs = 0
    for k in range(1, config.n_steps + 1):
        t = k * dt_ms / 1000.0
        users = mobility_step(users, dt, mob, user_rngs)
        rss, dist, elev = link.sample(t, users.x, users.y)

        sinr = ch.serving_sinr_db(rss, state.serving, config.channel.noise_power)
        failed = update_rlf(monitor, sinr, dt_ms)
        if failed.any():
            rlfs += int(failed.sum())
            state.ttt_elapsed[failed] = 0
            if events is not None:
                for i in np.flatnonzero(failed):
                    s = int(state.serving[i])
                    events.append(Event(t, drop_index, int(i), "rlf", s, s))

        target = evaluate(config.mechanism, state, rss=rss, distance=dist, elevation=elev, dt=dt_ms)
        moved = target >= 0
        if moved.any():
            source = state.serving.copy()
            pp = record_handover(tracker, source, target, t, moved)
            state.apply(target, t)
            monitor.reset(moved)
            hos += int(moved.sum())
            pps += int(pp.sum())
            if events is not None:
                for i in np.flatnonzero(moved):
                    kind = "pingpong_handover" if pp[i] else "handover"
                    events.append(Event(t, drop_index, int(i), kind, int(source[i]), int(target[i])))

    metrics = MetricsRecord(
        mechanism=config.mechanism.name,
        offset=config.mechanism.offset,
        ttt_ms=config.mechanism.ttt if isinstance(config.mechanism, Measurement) else 0,
        mobility=config.mobility_label,
        seed=config.base_seed,
        handovers=hos,
        pingpong_handovers=pps,
        rlfs=rlfs,
        drops=1,
    )
    return DropResult(metrics, events)


def _run_task(args):
    config, drop, record_events = args
    return run_drop(config, drop, record_events)


def record_sort_key(r: MetricsRecord):
    mech = MECHANISM_ORDER.index(r.mechanism) if r.mechanism in MECHANISM_ORDER else len(MECHANISM_ORDER)
    return (mech, r.offset, r.ttt_ms, 0 if r.mobility == "static" else 1, r.seed)


def run_campaign(
    configs: Iterable[SimConfig], workers: int = 1, events: list | None = None
) -> list[MetricsRecord]:
    """Run every configuration over all its drops; one aggregated record each.

    Records come back ordered by mechanism, offset, TTT, then static before
    mobile. Pass a list as ``events`` to collect per-event traces.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("campaign grid is empty")
    record_events = events is not None
    tasks = [(c, d, record_events) for c in configs for d in range(c.drops)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]

    records = []
    pos = 0
    for c in configs:
        chunk = results[pos : pos + c.drops]
        pos += c.drops
        records.append(aggregate([r.metrics for r in chunk]))
        if record_events:
            for r in chunk:
                events.extend(r.events)
    return sorted(records, key=record_sort_key)


def sweep_configs(
    base: SimConfig,
    mechanisms: dict[str, Iterable[float]],
    ttt_ms: Iterable[int] = (20, 40, 60, 80, 100),
    mobility: Iterable[MobilityConfig] = (MobilityConfig(),),
) -> list[SimConfig]:
    """Cartesian product of mechanisms/offsets, TTT (measurement only) and mobility models."""
    ttt_ms = list(ttt_ms)
    out = []
    for name, offsets in mechanisms.items():
        for offset in offsets:
            ttts = ttt_ms if name == "measurement" else [None]
            for ttt in ttts:
                for mob in mobility:
                    out.append(replace(base, mechanism=make_mechanism(name, offset, ttt), mobility=mob))
    return out


__all__ = [
    "DropResult",
    "Event",
    "Purpose",
    "SimConfig",
    "run_campaign",
    "run_drop",
    "seeded_stream",
    "sweep_configs",
]
