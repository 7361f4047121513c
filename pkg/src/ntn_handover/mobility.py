"""UE placement in the circular cell and smooth random mobility.

Users are held as a structure of arrays so a whole drop advances with a few
numpy operations per step. Random draws that belong to one user (new target
speed, new heading) come from that user's own generator, so a user's
trajectory does not depend on how many other users share the cell.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import DEFAULT_CELL_RADIUS_M

TWO_PI = 2.0 * math.pi


class MobilityMode(str, enum.Enum):
    STATIC = "static"
    SMOOTH_RANDOM = "smooth_random"


@dataclass(frozen=True)
class MobilityConfig:
    mode: MobilityMode = MobilityMode.STATIC
    v_max: float = 10.0
    # (speed, probability) pairs; None means {0: 0.2, v_max: 0.2}
    preferred_speeds: tuple[tuple[float, float], ...] | None = None
    direction_change_mean: float = 5.0  # s
    accel_max: float = 1.0  # m/s^2
    turn_duration: float = 1.0  # s
    cell_radius: float = DEFAULT_CELL_RADIUS_M

    def __post_init__(self):
        object.__setattr__(self, "mode", MobilityMode(self.mode))
        if self.v_max <= 0:
            raise ConfigError(f"v_max must be > 0, got {self.v_max}")
        if self.accel_max <= 0 or self.direction_change_mean <= 0 or self.turn_duration <= 0:
            raise ConfigError("accel_max, direction_change_mean and turn_duration must be > 0")
        if self.cell_radius <= 0:
            raise ConfigError(f"cell_radius must be > 0, got {self.cell_radius}")
        prefs = self.speed_preferences
        if any(not 0 <= s <= self.v_max for s, _ in prefs):
            raise ConfigError("preferred speeds must lie in [0, v_max]")
        if any(p < 0 for _, p in prefs) or sum(p for _, p in prefs) > 1 + 1e-12:
            raise ConfigError("preferred speed probabilities must be >= 0 and sum to <= 1")

    @property
    def speed_preferences(self) -> tuple[tuple[float, float], ...]:
        if self.preferred_speeds is None:
            return ((0.0, 0.2), (self.v_max, 0.2))
        return tuple(self.preferred_speeds)


@dataclass
class UserState:
    """Population of users; every field is a length-``n`` array."""

    x: np.ndarray
    y: np.ndarray
    speed: np.ndarray
    direction: np.ndarray
    target_speed: np.ndarray
    target_direction: np.ndarray
    turn_rate: np.ndarray
    time_to_direction_change: np.ndarray

    def __len__(self):
        return len(self.x)

    def copy(self) -> "UserState":
        return UserState(**{k: v.copy() for k, v in vars(self).items()})


def draw_speed(rng: np.random.Generator, config: MobilityConfig) -> float:
    u = rng.random()
    acc = 0.0
    for speed, prob in config.speed_preferences:
        acc += prob
        if u < acc:
            return float(speed)
    return float(rng.uniform(0.0, config.v_max))


def _rng_for(rngs, i):
    if isinstance(rngs, np.random.Generator):
        return rngs
    return rngs[i]


def init_users(
    count: int,
    cell_radius: float,
    rng: np.random.Generator,
    config: MobilityConfig = MobilityConfig(),
    user_rngs=None,
) -> UserState:
    """Place ``count`` users uniformly over the disc of radius ``cell_radius``.

    Positions come from ``rng``; per-user mobility draws come from
    ``user_rngs`` (a sequence of generators, or one shared generator) and
    fall back to ``rng``.
    """
    if count < 1:
        raise ConfigError(f"user count must be >= 1, got {count}")
    r = cell_radius * np.sqrt(rng.random(count))
    theta = TWO_PI * rng.random(count)
    x, y = r * np.cos(theta), r * np.sin(theta)
    zeros = np.zeros(count)
    users = UserState(
        x=x,
        y=y,
        speed=zeros.copy(),
        direction=zeros.copy(),
        target_speed=zeros.copy(),
        target_direction=zeros.copy(),
        turn_rate=zeros.copy(),
        time_to_direction_change=np.full(count, np.inf),
    )
    if config.mode is MobilityMode.STATIC:
        return users
    rngs = rng if user_rngs is None else user_rngs
    for i in range(count):
        g = _rng_for(rngs, i)
        users.speed[i] = draw_speed(g, config)
        users.target_speed[i] = draw_speed(g, config)
        users.direction[i] = g.uniform(0.0, TWO_PI)
        users.time_to_direction_change[i] = g.exponential(config.direction_change_mean)
    users.target_direction[:] = users.direction
    return users


def wrap_angle(a):
    """Map angles to [-pi, pi)."""
    return (np.asarray(a) + math.pi) % TWO_PI - math.pi


def step(users: UserState, dt: float, config: MobilityConfig, user_rngs=None) -> UserState:
    """Advance all users by ``dt`` seconds; static mode returns ``users`` unchanged."""
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    if config.mode is MobilityMode.STATIC:
        return users
    if user_rngs is None:
        raise ConfigError("smooth_random mobility needs per-user generators")
    s = users.copy()

    # speed: bounded acceleration toward the target, new target once reached
    dv = np.clip(s.target_speed - s.speed, -config.accel_max * dt, config.accel_max * dt)
    s.speed = np.clip(s.speed + dv, 0.0, config.v_max)
    for i in np.flatnonzero(np.abs(s.target_speed - s.speed) <= 1e-9):
        s.target_speed[i] = draw_speed(_rng_for(user_rngs, i), config)

    # heading: new target after an exponential holding time, linear drift to it
    s.time_to_direction_change = s.time_to_direction_change - dt
    for i in np.flatnonzero(s.time_to_direction_change <= 0):
        g = _rng_for(user_rngs, i)
        s.target_direction[i] = g.uniform(0.0, TWO_PI)
        s.time_to_direction_change[i] = g.exponential(config.direction_change_mean)
        s.turn_rate[i] = wrap_angle(s.target_direction[i] - s.direction[i]) / config.turn_duration
    remaining = wrap_angle(s.target_direction - s.direction)
    max_turn = np.abs(s.turn_rate) * dt
    s.direction = (s.direction + np.clip(remaining, -max_turn, max_turn)) % TWO_PI

    # position with a pi heading flip at the cell edge
    ux, uy = np.cos(s.direction), np.sin(s.direction)
    length = s.speed * dt
    nx, ny = s.x + length * ux, s.y + length * uy
    R = config.cell_radius
    out = nx * nx + ny * ny > R * R
    if np.any(out):
        px, py, vx, vy, L = s.x[out], s.y[out], ux[out], uy[out], length[out]
        pu = px * vx + py * vy
        disc = np.maximum(pu * pu - (px * px + py * py - R * R), 0.0)
        to_edge = np.clip(-pu + np.sqrt(disc), 0.0, L)
        back = L - to_edge
        nx[out] = px + (to_edge - back) * vx
        ny[out] = py + (to_edge - back) * vy
        s.direction[out] = (s.direction[out] + math.pi) % TWO_PI
        s.target_direction[out] = (s.target_direction[out] + math.pi) % TWO_PI
    r = np.hypot(nx, ny)
    over = r > R * (1.0 - 1e-12)
    if np.any(over):
        scale = R * (1.0 - 1e-12) / r[over]
        nx[over] *= scale
        ny[over] *= scale
    s.x, s.y = nx, ny
    return s

