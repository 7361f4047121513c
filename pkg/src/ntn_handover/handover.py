"""Handover triggers: A3-style measurement, distance, elevation angle and timer.

Every evaluator works on a batch of UEs at once. Metric arrays are shaped
``(n_ue, n_sat)`` and the result is an ``int`` array of target satellite
indices with ``-1`` meaning "no handover this step". Trigger conditions are
strict inequalities, so equality never fires.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError

NO_HANDOVER = -1


@dataclass(frozen=True)
class Measurement:
    hys_plus_off: float  # dB
    ttt: int  # ms

    name = "measurement"

    def __post_init__(self):
        if self.hys_plus_off < 0:
            raise ConfigError(f"hys_plus_off must be >= 0, got {self.hys_plus_off}")
        if self.ttt <= 0 or int(self.ttt) != self.ttt:
            raise ConfigError(f"ttt must be a positive whole number of ms, got {self.ttt}")

    @property
    def offset(self) -> float:
        return self.hys_plus_off


@dataclass(frozen=True)
class Distance:
    d_off: float  # m

    name = "distance"

    def __post_init__(self):
        if self.d_off < 0:
            raise ConfigError(f"d_off must be >= 0, got {self.d_off}")

    @property
    def offset(self) -> float:
        return self.d_off / 1000.0


@dataclass(frozen=True)
class Elevation:
    alpha_off: float  # degrees

    name = "elevation"

    def __post_init__(self):
        if self.alpha_off < 0:
            raise ConfigError(f"alpha_off must be >= 0, got {self.alpha_off}")

    @property
    def offset(self) -> float:
        return self.alpha_off


@dataclass(frozen=True)
class Timer:
    t_off: float  # s

    name = "timer"

    def __post_init__(self):
        if self.t_off < 0:
            raise ConfigError(f"t_off must be >= 0, got {self.t_off}")

    @property
    def offset(self) -> float:
        return self.t_off

    @property
    def t_off_ms(self) -> int:
        return int(round(self.t_off * 1000))


HoMechanism = Union[Measurement, Distance, Elevation, Timer]

MECHANISM_ORDER = ("measurement", "distance", "elevation", "timer")


@dataclass
class AssociationState:
    """Per-UE association bookkeeping for a batch of ``n`` UEs."""

    serving: np.ndarray  # (n,) int
    ttt_elapsed: np.ndarray  # (n, n_sat) int ms, measurement mode
    timer_elapsed: np.ndarray  # (n,) int ms, timer mode
    timer_running: np.ndarray  # (n,) bool, set by the first handover
    last_ho_time: np.ndarray  # (n,) float s
    previous_serving: np.ndarray  # (n,) int, -1 before the first handover

    @classmethod
    def start(cls, serving, n_sat: int) -> "AssociationState":
        serving = np.asarray(serving, dtype=int).copy()
        n = len(serving)
        return cls(
            serving=serving,
            ttt_elapsed=np.zeros((n, n_sat), dtype=np.int64),
            timer_elapsed=np.zeros(n, dtype=np.int64),
            timer_running=np.zeros(n, dtype=bool),
            last_ho_time=np.full(n, -np.inf),
            previous_serving=np.full(n, NO_HANDOVER, dtype=int),
        )

    def apply(self, target: np.ndarray, t: float) -> np.ndarray:
        """Switch every UE with ``target >= 0``; returns the switched mask."""
        moved = target >= 0
        if np.any(moved):
            self.previous_serving[moved] = self.serving[moved]
            self.serving[moved] = target[moved]
            self.last_ho_time[moved] = t
            self.ttt_elapsed[moved] = 0
            self.timer_elapsed[moved] = 0
            self.timer_running[moved] = True
        return moved


def _best(cond: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Index of the highest ``score`` among ``cond`` entries per row, else -1.

    ``argmax`` returns the first maximum, which gives the lowest-index tie-break.
    """
    masked = np.where(cond, score, -np.inf)
    idx = np.argmax(masked, axis=1)
    return np.where(cond.any(axis=1), idx, NO_HANDOVER)


def initial_association(mechanism: HoMechanism, rss=None, distance=None, elevation=None) -> np.ndarray:
    """Serving satellite per UE at the start of a drop (or after re-selection).

    Measurement picks the strongest RSS, elevation the highest satellite,
    distance and timer the nearest one. Ties go to the lowest index.
    """
    if isinstance(mechanism, Measurement):
        metric = rss
    elif isinstance(mechanism, Elevation):
        metric = elevation
    else:
        metric = None if distance is None else -np.asarray(distance, dtype=float)
    if metric is None or np.size(metric) == 0:
        raise ConfigError("initial association needs one sample per satellite")
    metric = np.atleast_2d(np.asarray(metric, dtype=float))
    return np.argmax(metric, axis=1)


def _rows(n):
    return np.arange(n)


def evaluate_measurement(
    state: AssociationState, rss: np.ndarray, hys_plus_off: float, ttt: int, dt: int
) -> np.ndarray:
    """Neighbour stronger than serving by the margin for at least ``ttt`` ms."""
    rss = np.atleast_2d(rss)
    n = rss.shape[0]
    serving_q = rss[_rows(n), state.serving][:, None]
    cond = rss > serving_q + hys_plus_off
    cond[_rows(n), state.serving] = False
    state.ttt_elapsed = np.where(cond, state.ttt_elapsed + dt, 0)
    return _best(state.ttt_elapsed >= ttt, rss)


def evaluate_distance(state: AssociationState, distance: np.ndarray, d_off: float) -> np.ndarray:
    distance = np.atleast_2d(distance)
    n = distance.shape[0]
    cond = distance < distance[_rows(n), state.serving][:, None] - d_off
    return _best(cond, -distance)


def evaluate_elevation(state: AssociationState, elevation: np.ndarray, alpha_off: float) -> np.ndarray:
    elevation = np.atleast_2d(elevation)
    n = elevation.shape[0]
    cond = elevation > elevation[_rows(n), state.serving][:, None] + alpha_off
    return _best(cond, elevation)


def evaluate_timer(state: AssociationState, distance: np.ndarray, t_off_ms: int, dt: int) -> np.ndarray:
    """Nearest-satellite switch first, then hand over every ``t_off`` to the next satellite."""
    distance = np.atleast_2d(distance)
    n_sat = distance.shape[1]
    target = evaluate_distance(state, distance, 0.0)
    running = state.timer_running
    target[running] = NO_HANDOVER
    state.timer_elapsed = np.where(running, state.timer_elapsed + dt, 0)
    nxt = state.serving + 1
    due = running & (state.timer_elapsed >= t_off_ms) & (nxt < n_sat)
    target[due] = nxt[due]
    return target


def evaluate(
    mechanism: HoMechanism, state: AssociationState, *, rss, distance, elevation, dt: int
) -> np.ndarray:
    if isinstance(mechanism, Measurement):
        return evaluate_measurement(state, rss, mechanism.hys_plus_off, mechanism.ttt, dt)
    if isinstance(mechanism, Distance):
        return evaluate_distance(state, distance, mechanism.d_off)
    if isinstance(mechanism, Elevation):
        return evaluate_elevation(state, elevation, mechanism.alpha_off)
    if isinstance(mechanism, Timer):
        return evaluate_timer(state, distance, mechanism.t_off_ms, dt)
    raise ConfigError(f"unknown handover mechanism {mechanism!r}")


def make_mechanism(name: str, offset: float, ttt_ms: int | None = None) -> HoMechanism:
    """Build a mechanism from its table units: dB, km, degrees or seconds."""
    if name == "measurement":
        if ttt_ms is None:
            raise ConfigError("measurement mechanism needs a TTT")
        return Measurement(float(offset), int(ttt_ms))
    if name == "distance":
        return Distance(float(offset) * 1000.0)
    if name == "elevation":
        return Elevation(float(offset))
    if name == "timer":
        return Timer(float(offset))
    raise ConfigError(f"unknown mechanism '{name}' (expected one of {', '.join(MECHANISM_ORDER)})")
