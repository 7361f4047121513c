"""Dense-urban NTN path loss, received signal strength and SINR.

All quantities are in dB / dBm unless stated otherwise. Shadow-fading samples
are supplied by the caller, so every function here is deterministic.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError


class Branch(str, enum.Enum):
    LOS = "los"
    NLOS = "nlos"


class ShadowFadingMode(str, enum.Enum):
    PER_DROP = "per_drop"
    PER_STEP = "per_step"


class EnvironmentLookup(str, enum.Enum):
    NEAREST = "nearest"
    LINEAR = "linear"


@dataclass(frozen=True)
class EnvironmentRow:
    elevation_bucket: int
    los_probability: float
    sigma_sf_los: float
    sigma_sf_nlos: float
    clutter_loss: float


DENSE_URBAN: tuple[EnvironmentRow, ...] = (
    EnvironmentRow(10, 0.282, 3.5, 15.5, 34.3),
    EnvironmentRow(20, 0.331, 3.4, 13.9, 30.9),
    EnvironmentRow(30, 0.398, 2.9, 12.4, 29.0),
    EnvironmentRow(40, 0.468, 3.0, 11.7, 27.7),
    EnvironmentRow(50, 0.537, 3.1, 10.6, 26.8),
    EnvironmentRow(60, 0.612, 2.7, 10.5, 26.2),
    EnvironmentRow(70, 0.738, 2.5, 10.1, 25.8),
    EnvironmentRow(80, 0.820, 2.3, 9.2, 25.5),
    EnvironmentRow(90, 0.981, 1.2, 9.2, 25.5),
)


def validate_environment(rows) -> tuple[EnvironmentRow, ...]:
    rows = tuple(rows)
    if [r.elevation_bucket for r in rows] != list(range(10, 100, 10)):
        raise ConfigError("environment table needs exactly the rows 10, 20, ..., 90 degrees")
    probs = [r.los_probability for r in rows]
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise ConfigError("LoS probabilities must lie in [0, 1]")
    if any(b <= a for a, b in zip(probs, probs[1:])):
        raise ConfigError("LoS probability must strictly increase with elevation")
    for r in rows:
        if min(r.sigma_sf_los, r.sigma_sf_nlos, r.clutter_loss) < 0:
            raise ConfigError(f"negative dB value in environment row {r.elevation_bucket}")
    return rows


@dataclass(frozen=True)
class ChannelConfig:
    carrier_frequency: float = 2.0  # GHz
    p_fluc: float = 11.0  # dB
    eirp_density: float = 34.0  # dBW/MHz
    prb_bandwidth: float = 0.18  # MHz
    noise_power: float = -121.4  # dBm
    shadow_fading_mode: ShadowFadingMode = ShadowFadingMode.PER_DROP
    # share of the shadow-fading variance redrawn every step (per_step mode only)
    sf_fast_fraction: float = 1.0
    # correlation of one UE's shadow fading across satellites (common local clutter)
    sf_satellite_correlation: float = 0.0
    environment_lookup: EnvironmentLookup = EnvironmentLookup.NEAREST
    environment: tuple[EnvironmentRow, ...] = field(default=DENSE_URBAN, repr=False)

    def __post_init__(self):
        if not 0 < self.carrier_frequency < 6:
            raise ConfigError(
                f"carrier_frequency must lie in (0, 6) GHz, got {self.carrier_frequency}"
            )
        if self.prb_bandwidth <= 0:
            raise ConfigError(f"prb_bandwidth must be > 0, got {self.prb_bandwidth}")
        if self.p_fluc < 0:
            raise ConfigError(f"p_fluc must be >= 0, got {self.p_fluc}")
        if not 0.0 <= self.sf_fast_fraction <= 1.0:
            raise ConfigError(f"sf_fast_fraction must lie in [0, 1], got {self.sf_fast_fraction}")
        if not 0.0 <= self.sf_satellite_correlation <= 1.0:
            raise ConfigError(
                f"sf_satellite_correlation must lie in [0, 1], got {self.sf_satellite_correlation}"
            )
        object.__setattr__(self, "shadow_fading_mode", ShadowFadingMode(self.shadow_fading_mode))
        object.__setattr__(self, "environment_lookup", EnvironmentLookup(self.environment_lookup))
        object.__setattr__(self, "environment", validate_environment(self.environment))


@dataclass(frozen=True)
class LinkSample:
    distance: float
    elevation: float
    pl_total: float
    rss: float
    sinr: float


def lookup_environment(elevation: float, table=DENSE_URBAN) -> EnvironmentRow:
    """Row of the nearest 10-degree bucket; halfway points round up."""
    if not elevation > 0:
        raise DomainError(f"elevation must be > 0 degrees, got {elevation}")
    if elevation > 90:
        raise DomainError(f"elevation must be <= 90 degrees, got {elevation}")
    bucket = min(max(int(math.floor(elevation / 10.0 + 0.5)), 1), 9)
    return table[bucket - 1]


_BUCKETS = np.arange(10.0, 100.0, 10.0)


@functools.lru_cache(maxsize=8)
def _table_columns(table) -> np.ndarray:
    """Rows of ``(p_los, sigma_los, sigma_nlos, clutter)``, one per bucket."""
    cols = np.array(
        [[r.los_probability, r.sigma_sf_los, r.sigma_sf_nlos, r.clutter_loss] for r in table]
    )
    cols.setflags(write=False)
    return cols


@functools.lru_cache(maxsize=8)
def _table_segments(table) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment ``value = a + b * elevation`` coefficients, shaped (4, 8)."""
    cols = _table_columns(table)
    slope = np.diff(cols, axis=0) / 10.0
    intercept = cols[:-1] - slope * _BUCKETS[:-1, None]
    return np.ascontiguousarray(intercept.T), np.ascontiguousarray(slope.T)


def environment_params(elevation, lookup=EnvironmentLookup.NEAREST, table=DENSE_URBAN):
    """Vectorized table lookup.

    Returns
    -------
    tuple of ndarray
        ``(p_los, sigma_los, sigma_nlos, clutter_loss)`` shaped like ``elevation``.
        ``linear`` interpolates between neighbouring buckets and clamps
        outside [10, 90] degrees.
    """
    elevation = np.asarray(elevation, dtype=float)
    if np.any(elevation <= 0):
        raise DomainError("elevation must be > 0 degrees")
    cols = _table_columns(table)
    if EnvironmentLookup(lookup) is EnvironmentLookup.NEAREST:
        idx = np.clip(np.floor(elevation / 10.0 + 0.5).astype(int), 1, 9) - 1
        return tuple(cols[idx, j] for j in range(4))
    # one segment index shared by the four columns; clamped outside [10, 90]
    el = np.clip(elevation, 10.0, 90.0)
    seg = np.minimum(((el - 10.0) * 0.1).astype(np.intp), 7)
    a, b = _table_segments(table)
    return tuple(a[j].take(seg) + b[j].take(seg) * el for j in range(4))


def fspl(distance, fc):
    """Free-space path loss in dB for ``distance`` in meters and ``fc`` in GHz."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0) or fc <= 0:
        raise DomainError("fspl needs distance > 0 m and fc > 0 GHz")
    out = 32.45 + 20.0 * np.log10(fc) + 20.0 * np.log10(distance)
    return float(out) if out.ndim == 0 else out


def basic_path_loss(distance, row: EnvironmentRow, branch, sf_sample, fc=2.0):
    """FSPL plus shadow fading; clutter loss is added on the NLoS branch only."""
    pl = fspl(distance, fc) + sf_sample
    if Branch(branch) is Branch.NLOS:
        pl = pl + row.clutter_loss
    return pl


def scintillation_loss(p_fluc: float) -> float:
    return p_fluc / math.sqrt(2.0)


def total_path_loss(distance, elevation, sf_los, sf_nlos, config: ChannelConfig):
    """LoS-probability-weighted path loss in dB plus ionospheric scintillation.

    The weighting is done on dB values. Gas absorption and building entry
    loss are zero below 6 GHz for outdoor users.
    """
    p_los, _, _, clutter = environment_params(
        elevation, config.environment_lookup, config.environment
    )
    free = fspl(distance, config.carrier_frequency)
    pl_los = free + sf_los
    pl_nlos = free + sf_nlos + clutter
    out = p_los * pl_los + (1.0 - p_los) * pl_nlos + scintillation_loss(config.p_fluc)
    return float(out) if np.ndim(out) == 0 else out


def eirp_per_prb_dbm(config: ChannelConfig) -> float:
    return config.eirp_density + 10.0 * math.log10(config.prb_bandwidth) + 30.0


def rss(pl_total, config: ChannelConfig):
    return eirp_per_prb_dbm(config) - pl_total


def db_to_mw(x):
    return np.exp(np.asarray(x, dtype=float) * (math.log(10.0) / 10.0))


def sinr(serving_rss, interferer_rss, noise):
    """SINR in dB; interference and noise add in linear milliwatts."""
    if serving_rss is None or np.size(serving_rss) == 0 or np.any(np.isnan(serving_rss)):
        raise DomainError("sinr needs a serving signal")
    interference = float(np.sum(db_to_mw(interferer_rss))) if np.size(interferer_rss) else 0.0
    return float(10.0 * np.log10(db_to_mw(serving_rss) / (interference + db_to_mw(noise))))


def serving_sinr_db(rss_dbm: np.ndarray, serving: np.ndarray, noise: float) -> np.ndarray:
    """Per-UE SINR for an ``(n_ue, n_sat)`` RSS matrix; all other satellites interfere."""
    lin = db_to_mw(rss_dbm)
    s = lin[np.arange(lin.shape[0]), serving]
    return 10.0 * np.log10(s / (lin.sum(axis=1) - s + db_to_mw(noise)))


def mix_fading(z_slow, z_fast, fast_fraction):
    """Unit-variance combination of a persistent and a per-step standard normal."""
    return math.sqrt(1.0 - fast_fraction) * z_slow + math.sqrt(fast_fraction) * z_fast


def correlate_across_satellites(z_links, z_common, rho):
    """Unit normals with pairwise correlation ``rho`` across the last axis.

    ``z_links`` is ``(..., n_sat)`` and ``z_common`` holds one shared draw per row.
    """
    z_links = np.asarray(z_links, dtype=float)
    if rho == 0.0:
        return z_links
    return math.sqrt(rho) * np.asarray(z_common)[..., None] + math.sqrt(1.0 - rho) * z_links


def link_samples(distances, elevations, sf_los, sf_nlos, config: ChannelConfig) -> list[LinkSample]:
    """Samples for every satellite seen by one UE; ``sinr`` assumes that satellite serves."""
    pl = np.atleast_1d(total_path_loss(np.asarray(distances), np.asarray(elevations), sf_los, sf_nlos, config))
    q = rss(pl, config)
    out = []
    for i in range(len(q)):
        others = np.delete(q, i)
        out.append(
            LinkSample(
                float(np.atleast_1d(distances)[i]),
                float(np.atleast_1d(elevations)[i]),
                float(pl[i]),
                float(q[i]),
                sinr(q[i], others, config.noise_power),
            )
        )
    return out
