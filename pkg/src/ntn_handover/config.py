"""Campaign description files: parsing, canonical formatting and presets.

A campaign file is an INI-style document with the sections ``[scenario]``,
``[sweep]``, ``[seeds]``, ``[output]`` and an optional ``[environment]``
that replaces the dense-urban table. Values use the units of the parameter
tables (km, dB, degrees, seconds). Every key is a field of one of the
section dataclasses; anything else is rejected with the key in the message.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

from .channel import DENSE_URBAN, ChannelConfig, EnvironmentRow, validate_environment
from .engine import SimConfig, sweep_configs
from .errors import ConfigError
from .geometry import ConstellationConfig
from .handover import MECHANISM_ORDER
from .mobility import MobilityConfig, MobilityMode

MOBILITY_LABELS = ("static", "mobile")


@dataclass(frozen=True)
class Scenario:
    environment: str = "dense_urban"
    num_satellites: int = 3
    altitude_km: float = 600.0
    satellite_spacing_km: float = 50.0
    satellite_speed_kmps: float = 7.56
    cell_diameter_km: float = 50.0
    carrier_frequency_ghz: float = 2.0
    eirp_density_dbw_mhz: float = 34.0
    prb_bandwidth_mhz: float = 0.18
    noise_power_dbm: float = -121.4
    s4: float = 0.5  # reference only; the loss uses p_fluc
    p_fluc_db: float = 11.0
    shadow_fading_mode: str = "per_drop"
    sf_fast_fraction: float = 1.0
    sf_satellite_correlation: float = 0.0
    environment_lookup: str = "nearest"
    q_in_db: float = -6.0
    q_out_db: float = -8.0
    t310_ms: int = 500
    pingpong_window_s: float = 5.0
    step_ms: int = 10
    v_max_mps: float = 10.0
    direction_change_mean_s: float = 5.0
    accel_max_mps2: float = 1.0
    turn_duration_s: float = 1.0


@dataclass(frozen=True)
class Sweep:
    mechanisms: tuple[str, ...] = MECHANISM_ORDER
    hys_plus_off_db: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    ttt_ms: tuple[int, ...] = (20, 40, 60, 80, 100)
    d_off_km: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
    alpha_off_deg: tuple[float, ...] = tuple(float(a) for a in range(1, 11))
    t_off_s: tuple[float, ...] = (6.4, 6.45, 6.5, 6.55, 6.6, 6.65, 6.7, 6.75, 6.8)
    mobility: tuple[str, ...] = MOBILITY_LABELS


@dataclass(frozen=True)
class Seeds:
    base_seed: int = 0
    channel_seed: int | None = None
    drops: int = 4
    users_per_drop: int = 1963


@dataclass(frozen=True)
class Output:
    results: str = "results.csv"
    pathloss_trace: str = ""
    trace_samples: int = 251
    trace_max_ground_distance_km: float = 125.0
    events: str = ""
    workers: int = 1


@dataclass(frozen=True)
class CampaignSpec:
    scenario: Scenario = Scenario()
    sweep: Sweep = Sweep()
    seeds: Seeds = Seeds()
    output: Output = Output()
    environment: tuple[EnvironmentRow, ...] = field(default=DENSE_URBAN, repr=False)

    def __post_init__(self):
        validate_spec(self)


SECTIONS = {"scenario": Scenario, "sweep": Sweep, "seeds": Seeds, "output": Output}


# value parsers -------------------------------------------------------------

def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none") else _int(text)


def _str(text: str) -> str:
    return text.strip()


def _list(item: Callable):
    def parse(text: str):
        parts = [p.strip() for p in text.replace("\n", ",").split(",") if p.strip()]
        return tuple(item(p) for p in parts)

    return parse


_PARSERS = {
    "float": _float,
    "int": _int,
    "str": _str,
    "int | None": _optional_int,
    "tuple[str, ...]": _list(_str),
    "tuple[float, ...]": _list(_float),
    "tuple[int, ...]": _list(_int),
}


def _parser_for(section_cls, key: str):
    for f in fields(section_cls):
        if f.name == key:
            return _PARSERS[f.type]
    raise KeyError(key)


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# validation ----------------------------------------------------------------

def _check(ok: bool, key: str, message: str):
    if not ok:
        raise ConfigError(f"{key}: {message}")


def validate_spec(spec: CampaignSpec) -> None:
    """Range checks that need more than one field; raises ConfigError naming the key."""
    sc, sw, se, out = spec.scenario, spec.sweep, spec.seeds, spec.output
    _check(sc.environment in ("dense_urban", "custom"), "scenario.environment",
           f"expected dense_urban or custom, got {sc.environment!r}")
    _check(sc.environment == "custom" or spec.environment == DENSE_URBAN, "scenario.environment",
           "dense_urban cannot be combined with modified [environment] rows")
    _check(sc.shadow_fading_mode in ("per_drop", "per_step"), "scenario.shadow_fading_mode",
           f"expected per_drop or per_step, got {sc.shadow_fading_mode!r}")
    _check(sc.environment_lookup in ("nearest", "linear"), "scenario.environment_lookup",
           f"expected nearest or linear, got {sc.environment_lookup!r}")
    _check(sc.q_in_db > sc.q_out_db, "scenario.q_in_db",
           f"q_in ({sc.q_in_db}) must exceed q_out ({sc.q_out_db})")
    _check(sc.step_ms > 0, "scenario.step_ms", "must be > 0")
    _check(sc.t310_ms > 0 and sc.t310_ms % sc.step_ms == 0, "scenario.t310_ms",
           f"{sc.t310_ms} must be a positive multiple of step_ms={sc.step_ms}")
    _check(0 < sc.carrier_frequency_ghz < 6, "scenario.carrier_frequency_ghz", "must lie in (0, 6)")
    _check(sc.cell_diameter_km > 0, "scenario.cell_diameter_km", "must be > 0")
    _check(sc.altitude_km > 0, "scenario.altitude_km", "must be > 0")
    _check(sc.s4 >= 0, "scenario.s4", "must be >= 0")
    for m in sw.mechanisms:
        _check(m in MECHANISM_ORDER, "sweep.mechanisms",
               f"unknown mechanism {m!r} (expected {', '.join(MECHANISM_ORDER)})")
    _check(len(sw.mechanisms) > 0, "sweep.mechanisms", "empty list")
    _check(all(v >= 0 for v in sw.hys_plus_off_db), "sweep.hys_plus_off_db", "values must be >= 0")
    for t in sw.ttt_ms:
        _check(t > 0 and t % sc.step_ms == 0, "sweep.ttt_ms",
               f"{t} must be a positive multiple of step_ms={sc.step_ms}")
    _check(all(v >= 0 for v in sw.d_off_km), "sweep.d_off_km", "values must be >= 0")
    _check(all(0 <= v <= 90 for v in sw.alpha_off_deg), "sweep.alpha_off_deg", "values must lie in [0, 90]")
    _check(all(v >= 0 for v in sw.t_off_s), "sweep.t_off_s", "values must be >= 0")
    for m in sw.mobility:
        _check(m in MOBILITY_LABELS, "sweep.mobility", f"unknown mobility {m!r} (expected static, mobile)")
    _check(len(sw.mobility) > 0, "sweep.mobility", "empty list")
    _check(se.base_seed >= 0, "seeds.base_seed", "must be >= 0")
    _check(se.channel_seed is None or se.channel_seed >= 0, "seeds.channel_seed", "must be >= 0")
    _check(se.drops >= 1, "seeds.drops", "must be >= 1")
    _check(se.users_per_drop >= 1, "seeds.users_per_drop", "must be >= 1")
    _check(out.trace_samples >= 2, "output.trace_samples", "must be >= 2")
    _check(out.trace_max_ground_distance_km > 0, "output.trace_max_ground_distance_km", "must be > 0")
    _check(out.workers >= 1, "output.workers", "must be >= 1")
    # the dataclasses below carry their own checks; surface them with a key
    try:
        base_sim_config(spec)
    except ConfigError as exc:
        raise ConfigError(f"scenario: {exc}") from None


# parsing -------------------------------------------------------------------

def _parse_environment(items: dict[str, str]) -> tuple[EnvironmentRow, ...]:
    rows = {r.elevation_bucket: r for r in DENSE_URBAN}
    for key, text in items.items():
        try:
            bucket = int(key)
            vals = _list(_float)(text)
        except ValueError:
            raise ConfigError(f"environment.{key}: expected '<elevation> = p_los, sigma_los, sigma_nlos, clutter'") from None
        if bucket not in rows or len(vals) != 4:
            raise ConfigError(f"environment.{key}: expected a 10..90 bucket with 4 values")
        rows[bucket] = EnvironmentRow(bucket, *vals)
    try:
        return validate_environment(rows[b] for b in sorted(rows))
    except ConfigError as exc:
        raise ConfigError(f"environment: {exc}") from None


def _apply(values: dict[str, dict], section: str, key: str, text: str) -> None:
    if section not in SECTIONS:
        raise ConfigError(f"unknown section [{section}]")
    try:
        parser = _parser_for(SECTIONS[section], key)
    except KeyError:
        raise ConfigError(f"unknown key '{section}.{key}'") from None
    try:
        values[section][key] = parser(text)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {text!r} ({exc})") from None


def parse_config(
    path: str | Path | None = None,
    overrides: dict[str, str] | None = None,
    default_paper: bool = False,
) -> CampaignSpec:
    """Build a CampaignSpec from a file, then apply ``section.key -> text`` overrides.

    Starts from the library defaults, or from ``paper_preset()`` when
    ``default_paper`` is set; the file and the overrides are layered on top.
    """
    start = paper_preset() if default_paper else CampaignSpec()
    values = {name: {} for name in SECTIONS}
    environment = start.environment
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cp = configparser.ConfigParser(interpolation=None, strict=True)
        cp.optionxform = str
        try:
            cp.read_string(path.read_text(), source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from None
        for section in cp.sections():
            if section == "environment":
                environment = _parse_environment(dict(cp.items(section)))
                continue
            for key, text in cp.items(section):
                _apply(values, section, key, text)
    for dotted, text in (overrides or {}).items():
        section, sep, key = dotted.partition(".")
        if not sep:
            raise ConfigError(f"override '{dotted}' must look like section.key=value")
        _apply(values, section, key, text)
    sections = {name: replace(getattr(start, name), **values[name]) for name in SECTIONS}
    if environment != DENSE_URBAN and "environment" not in values["scenario"]:
        sections["scenario"] = replace(sections["scenario"], environment="custom")
    return CampaignSpec(environment=environment, **sections)


def format_config(spec: CampaignSpec) -> str:
    """Canonical text form; ``parse_config`` on it reproduces ``spec``."""
    lines = []
    for name, cls in SECTIONS.items():
        lines.append(f"[{name}]")
        section = getattr(spec, name)
        for f in fields(cls):
            lines.append(f"{f.name} = {_format_value(getattr(section, f.name))}")
        lines.append("")
    if spec.environment != DENSE_URBAN:
        lines.append("[environment]")
        for r in spec.environment:
            vals = (r.los_probability, r.sigma_sf_los, r.sigma_sf_nlos, r.clutter_loss)
            lines.append(f"{r.elevation_bucket} = {_format_value(vals)}")
        lines.append("")
    return "\n".join(lines)


def paper_preset() -> CampaignSpec:
    """Reference scenario parameters plus the calibrated fading model.

    The fading time structure is a modeling choice: the per-step mixture with
    satellite-correlated draws gives the expected ping-pong and RLF behavior.
    """
    scenario = replace(
        Scenario(),
        shadow_fading_mode="per_step",
        sf_fast_fraction=0.5,
        sf_satellite_correlation=0.75,
        environment_lookup="linear",
    )
    return CampaignSpec(scenario=scenario)


# conversion to engine objects ---------------------------------------------

def channel_config(spec: CampaignSpec) -> ChannelConfig:
    sc = spec.scenario
    return ChannelConfig(
        carrier_frequency=sc.carrier_frequency_ghz,
        p_fluc=sc.p_fluc_db,
        eirp_density=sc.eirp_density_dbw_mhz,
        prb_bandwidth=sc.prb_bandwidth_mhz,
        noise_power=sc.noise_power_dbm,
        shadow_fading_mode=sc.shadow_fading_mode,
        sf_fast_fraction=sc.sf_fast_fraction,
        sf_satellite_correlation=sc.sf_satellite_correlation,
        environment_lookup=sc.environment_lookup,
        environment=spec.environment,
    )


def constellation_config(spec: CampaignSpec) -> ConstellationConfig:
    sc = spec.scenario
    return ConstellationConfig(
        num_satellites=sc.num_satellites,
        spacing=sc.satellite_spacing_km * 1000.0,
        altitude=sc.altitude_km * 1000.0,
        speed=sc.satellite_speed_kmps * 1000.0,
    )


def mobility_config(spec: CampaignSpec, label: str) -> MobilityConfig:
    sc = spec.scenario
    mode = MobilityMode.STATIC if label == "static" else MobilityMode.SMOOTH_RANDOM
    return MobilityConfig(
        mode=mode,
        v_max=sc.v_max_mps,
        direction_change_mean=sc.direction_change_mean_s,
        accel_max=sc.accel_max_mps2,
        turn_duration=sc.turn_duration_s,
        cell_radius=sc.cell_diameter_km * 500.0,
    )


def base_sim_config(spec: CampaignSpec) -> SimConfig:
    """SimConfig carrying everything except the mechanism and mobility model."""
    sc, se = spec.scenario, spec.seeds
    try:
        return SimConfig(
            constellation=constellation_config(spec),
            channel=channel_config(spec),
            mobility=mobility_config(spec, "static"),
            step_ms=sc.step_ms,
            drops=se.drops,
            users_per_drop=se.users_per_drop,
            base_seed=se.base_seed,
            channel_seed=se.channel_seed,
            cell_radius=sc.cell_diameter_km * 500.0,
            q_in=sc.q_in_db,
            q_out=sc.q_out_db,
            t310_ms=sc.t310_ms,
            pingpong_window=sc.pingpong_window_s,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def campaign_configs(spec: CampaignSpec) -> list[SimConfig]:
    """Every (mechanism, offset, TTT, mobility) configuration of the sweep."""
    sw = spec.sweep
    grids = {
        "measurement": sw.hys_plus_off_db,
        "distance": sw.d_off_km,
        "elevation": sw.alpha_off_deg,
        "timer": sw.t_off_s,
    }
    mechanisms = {m: grids[m] for m in MECHANISM_ORDER if m in sw.mechanisms}
    mobility = [mobility_config(spec, label) for label in MOBILITY_LABELS if label in sw.mobility]
    return sweep_configs(base_sim_config(spec), mechanisms, sw.ttt_ms, mobility)
