"""Radio link failure detection, ping-pong detection and metric records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class RlfMonitor:
    """T310 state for a batch of UEs.

    SINR below ``q_out`` starts T310, SINR above ``q_in`` stops it, and the
    band in between leaves the phase alone. Both comparisons are strict.
    """

    out_of_sync: np.ndarray  # (n,) bool
    t310_elapsed: np.ndarray  # (n,) int ms
    q_in: float = -6.0
    q_out: float = -8.0
    t310: int = 500

    def __post_init__(self):
        if not self.q_in > self.q_out:
            raise ConfigError(f"q_in ({self.q_in}) must exceed q_out ({self.q_out})")
        if self.t310 <= 0:
            raise ConfigError(f"t310 must be > 0 ms, got {self.t310}")

    @classmethod
    def create(cls, n: int, q_in=-6.0, q_out=-8.0, t310=500) -> "RlfMonitor":
        return cls(np.zeros(n, dtype=bool), np.zeros(n, dtype=np.int64), q_in, q_out, t310)

    def reset(self, mask) -> None:
        self.out_of_sync[mask] = False
        self.t310_elapsed[mask] = 0


def update_rlf(monitor: RlfMonitor, sinr, dt: int) -> np.ndarray:
    """Advance the monitors by one step; returns the mask of UEs declaring RLF.

    A UE that declares RLF is put back in sync here; re-establishment is the
    caller's business.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    sinr = np.asarray(sinr, dtype=float)
    was_out = monitor.out_of_sync
    start = ~was_out & (sinr < monitor.q_out)
    recover = was_out & (sinr > monitor.q_in)
    counting = was_out & ~recover

    monitor.t310_elapsed = np.where(counting, monitor.t310_elapsed + dt, 0)
    monitor.out_of_sync = (was_out & ~recover) | start
    fired = counting & (monitor.t310_elapsed >= monitor.t310)
    monitor.reset(fired)
    return fired


@dataclass
class PingPongTracker:
    previous_serving: np.ndarray  # (n,) int, -1 when unknown
    last_ho_time: np.ndarray  # (n,) float s
    window: float = 5.0

    def __post_init__(self):
        if self.window <= 0:
            raise ConfigError(f"ping-pong window must be > 0 s, got {self.window}")

    @classmethod
    def create(cls, n: int, window: float = 5.0) -> "PingPongTracker":
        return cls(np.full(n, -1, dtype=int), np.full(n, -np.inf), window)


def record_handover(tracker: PingPongTracker, source, target, t: float, mask=None) -> np.ndarray:
    """Register handovers ``source -> target`` at time ``t``; returns the ping-pong flags.

    A handover is a ping-pong when it returns to the satellite the UE left on
    its previous handover, no more than ``window`` seconds ago.
    """
    n = len(tracker.previous_serving)
    mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    source = np.broadcast_to(np.asarray(source, dtype=int), (n,))
    target = np.broadcast_to(np.asarray(target, dtype=int), (n,))
    is_pp = (
        mask
        & (target == tracker.previous_serving)
        & (t - tracker.last_ho_time <= tracker.window)
    )
    tracker.previous_serving = np.where(mask, source, tracker.previous_serving)
    tracker.last_ho_time = np.where(mask, t, tracker.last_ho_time)
    return is_pp


@dataclass(frozen=True)
class MetricsRecord:
    mechanism: str = ""
    offset: float = 0.0
    ttt_ms: int = 0
    mobility: str = "static"
    seed: int = 0
    handovers: int = 0
    pingpong_handovers: int = 0
    rlfs: int = 0
    drops: int = 0

    def __post_init__(self):
        if min(self.handovers, self.pingpong_handovers, self.rlfs) < 0:
            raise ValueError("metric counts must be non-negative")
        if self.pingpong_handovers > self.handovers:
            raise ValueError("ping-pong handovers cannot exceed handovers")

    def config_key(self):
        return (self.mechanism, self.offset, self.ttt_ms, self.mobility, self.seed)


def aggregate(records, **echo) -> MetricsRecord:
    """Sum counts over UEs or drops of one configuration; ``echo`` overrides the config fields."""
    records = list(records)
    first = records[0] if records else MetricsRecord()
    base = dict(
        mechanism=first.mechanism,
        offset=first.offset,
        ttt_ms=first.ttt_ms,
        mobility=first.mobility,
        seed=first.seed,
    )
    base.update(echo)
    return MetricsRecord(
        handovers=sum(r.handovers for r in records),
        pingpong_handovers=sum(r.pingpong_handovers for r in records),
        rlfs=sum(r.rlfs for r in records),
        drops=sum(r.drops for r in records),
        **base,
    )
