"""Linear LEO pass over a ground cell: satellite positions, elevation, slant range.

The local frame has its origin at the cell center, x pointing along the
satellite ground track and y across it. Satellites fly an overhead pass
(y offset 0) at constant altitude and speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

EARTH_RADIUS_M = 6_371_000.0

DEFAULT_ALTITUDE_M = 600_000.0
DEFAULT_SPEED_MPS = 7_560.0
DEFAULT_SPACING_M = 50_000.0
DEFAULT_CELL_RADIUS_M = 25_000.0


@dataclass(frozen=True)
class GroundPosition:
    x: float
    y: float


@dataclass(frozen=True)
class SatelliteState:
    along_track: float
    altitude: float
    speed: float


@dataclass(frozen=True)
class ConstellationConfig:
    num_satellites: int = 3
    spacing: float = DEFAULT_SPACING_M
    altitude: float = DEFAULT_ALTITUDE_M
    speed: float = DEFAULT_SPEED_MPS

    def __post_init__(self):
        if self.num_satellites < 1:
            raise ConfigError(f"num_satellites must be >= 1, got {self.num_satellites}")
        if self.spacing <= 0:
            raise ConfigError(f"spacing must be > 0, got {self.spacing}")
        if self.altitude <= 0:
            raise ConfigError(f"altitude must be > 0, got {self.altitude}")
        if self.speed <= 0:
            raise ConfigError(f"speed must be > 0, got {self.speed}")

    @property
    def sim_duration(self) -> float:
        """Seconds until the last satellite is above the cell center."""
        return (self.num_satellites - 1) * self.spacing / self.speed


def along_track_positions(config: ConstellationConfig, t: float) -> np.ndarray:
    """Sub-satellite x coordinates at time ``t``, satellite 1 first."""
    idx = np.arange(config.num_satellites)
    return -idx * config.spacing + config.speed * t


def propagate(config: ConstellationConfig, t: float) -> list[SatelliteState]:
    """Satellite states at time ``t`` seconds after satellite 1 crosses the center.

    Raises
    ------
    ValueError
        If ``t`` lies outside ``[0, sim_duration]``.
    """
    if t < 0 or t > config.sim_duration:
        raise ValueError(f"t={t} s outside the pass [0, {config.sim_duration}] s")
    return [
        SatelliteState(float(a), config.altitude, config.speed)
        for a in along_track_positions(config, t)
    ]


def elevation_deg(ue_x, ue_y, sat_x, altitude):
    """Elevation angle in degrees, flat local-tangent-plane approximation.

    Broadcasts over numpy arrays. The result lies in (0, 90].
    """
    rho = np.hypot(np.asarray(ue_x) - sat_x, ue_y)
    return np.degrees(np.arctan2(altitude, rho))


def slant_range_m(elevation, altitude, earth_radius=EARTH_RADIUS_M):
    """UE to satellite distance from the elevation angle on a spherical Earth.

    ``d = sqrt(R^2 sin^2(a) + h^2 + 2 h R) - R sin(a)``; broadcasts over arrays.
    """
    s = np.sin(np.radians(elevation))
    r_sin = earth_radius * s
    return np.sqrt(r_sin * r_sin + altitude * altitude + 2.0 * altitude * earth_radius) - r_sin


def link_geometry(ue_x, ue_y, sat_x, altitude, earth_radius=EARTH_RADIUS_M):
    """Elevation (deg) and slant range (m) together, without a trigonometric round trip.

    Same values as ``elevation_deg`` followed by ``slant_range_m``; uses
    ``sin(a) = h / sqrt(h^2 + rho^2)`` for the ground distance ``rho``.
    """
    dx = np.asarray(ue_x) - sat_x
    rho2 = dx * dx
    rho2 += np.square(ue_y)
    elevation = np.degrees(np.arctan2(altitude, np.sqrt(rho2)))
    rho2 += altitude * altitude
    r_sin = (earth_radius * altitude) / np.sqrt(rho2)
    distance = np.sqrt(r_sin * r_sin + (altitude * altitude + 2.0 * altitude * earth_radius))
    distance -= r_sin
    return elevation, distance


def elevation_angle(ue: GroundPosition, sat: SatelliteState) -> float:
    return float(elevation_deg(ue.x, ue.y, sat.along_track, sat.altitude))


def slant_distance(ue: GroundPosition, sat: SatelliteState) -> float:
    """Slant distance in meters, evaluated through the elevation angle."""
    return float(slant_range_m(elevation_angle(ue, sat), sat.altitude))
