"""Command-line front end: run a handover campaign and write CSV tables.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
or I/O failures.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelConfig, total_path_loss
from .config import (
    CampaignSpec,
    campaign_configs,
    channel_config,
    constellation_config,
    format_config,
    parse_config,
)
from .engine import Event, record_sort_key, run_campaign
from .errors import ConfigError, DomainError
from .geometry import ConstellationConfig, elevation_deg, slant_range_m
from .monitor import MetricsRecord

RESULTS_HEADER = ("mechanism", "offset", "ttt_ms", "mobility", "seed_group", "hos", "pp_hos", "rlfs")
TRACE_HEADER = ("ground_distance_m", "elevation_deg", "pl_total_db")
EVENTS_HEADER = ("time_s", "drop", "ue", "event", "source", "target")


@contextlib.contextmanager
def _open_out(path):
    """Text handle for ``path``; ``-`` is stdout. I/O errors name the path."""
    if str(path) == "-":
        yield sys.stdout
        return
    try:
        with open(path, "w", newline="") as fh:
            yield fh
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _num(x: float) -> str:
    return f"{x:g}"


def results_rows(records: Iterable[MetricsRecord]) -> list[tuple]:
    rows = []
    for r in sorted(records, key=record_sort_key):
        ttt = str(r.ttt_ms) if r.mechanism == "measurement" else ""
        rows.append(
            (r.mechanism, _num(r.offset), ttt, r.mobility, str(r.seed),
             str(r.handovers), str(r.pingpong_handovers), str(r.rlfs))
        )
    return rows


def emit_results(records: Iterable[MetricsRecord], path) -> None:
    """One CSV row per configuration in mechanism, offset, TTT, static-first order."""
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        w.writerows(results_rows(records))


def pathloss_trace(
    channel: ChannelConfig,
    constellation: ConstellationConfig,
    samples: int = 251,
    max_ground_distance: float = 125_000.0,
) -> np.ndarray:
    """Total path loss for a UE at the cell center as one satellite passes by.

    Shadow fading is off. Returns an array with columns ground distance (m),
    elevation (deg) and path loss (dB).
    """
    if samples < 2:
        raise ConfigError(f"trace needs at least 2 samples, got {samples}")
    ground = np.linspace(0.0, max_ground_distance, samples)
    elev = elevation_deg(ground, 0.0, 0.0, constellation.altitude)
    dist = slant_range_m(elev, constellation.altitude)
    pl = total_path_loss(dist, elev, 0.0, 0.0, channel)
    return np.column_stack([ground, elev, pl])


def emit_pathloss_trace(channel, constellation, path, samples=251, max_ground_distance=125_000.0):
    trace = pathloss_trace(channel, constellation, samples, max_ground_distance)
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for g, e, pl in trace:
            w.writerow((f"{g:.3f}", f"{e:.6f}", f"{pl:.6f}"))
    return trace


def emit_events(events: Iterable[Event], path) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENTS_HEADER)
        for e in events:
            w.writerow((f"{e.time:.3f}", e.drop, e.ue, e.kind, e.source, e.target))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ntn-handover",
        description="Simulate LEO satellite handover mechanisms and write CSV result tables.",
    )
    p.add_argument("--config", metavar="PATH", help="campaign file (INI sections scenario/sweep/seeds/output)")
    p.add_argument("--default-paper", action="store_true",
                   help="start from the reference scenario parameters with the calibrated fading model")
    p.add_argument("--mechanism", metavar="NAME",
                   help="restrict the sweep to measurement, distance, elevation or timer (comma list allowed)")
    p.add_argument("--seed", type=int, metavar="N", help="base seed")
    p.add_argument("--drops", type=int, metavar="N", help="drops per configuration")
    p.add_argument("--users", type=int, metavar="N", help="users per drop")
    p.add_argument("--workers", type=int, metavar="N", help="worker processes for drops")
    p.add_argument("--out", metavar="PATH", help="results CSV ('-' for stdout)")
    p.add_argument("--trace-pathloss", metavar="PATH", help="also write a path-loss trace CSV")
    p.add_argument("--events", metavar="PATH", help="also write a per-event trace CSV")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value; repeatable")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved config in canonical form and exit")
    return p


def resolve_spec(args: argparse.Namespace) -> CampaignSpec:
    overrides: dict[str, str] = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    flag_map = {
        "sweep.mechanisms": args.mechanism,
        "seeds.base_seed": args.seed,
        "seeds.drops": args.drops,
        "seeds.users_per_drop": args.users,
        "output.workers": args.workers,
        "output.results": args.out,
        "output.pathloss_trace": args.trace_pathloss,
        "output.events": args.events,
    }
    for key, value in flag_map.items():
        if value is not None:
            overrides[key] = str(value)
    return parse_config(args.config, overrides, default_paper=args.default_paper)


def check_output_paths(spec: CampaignSpec) -> None:
    """Fail before simulating if an output directory does not exist."""
    out = spec.output
    for path in (out.results, out.pathloss_trace, out.events):
        if path and path != "-" and not Path(path).resolve().parent.is_dir():
            raise OSError(f"cannot write {path}: directory does not exist")


def run(spec: CampaignSpec) -> list[MetricsRecord]:
    out = spec.output
    check_output_paths(spec)
    if out.pathloss_trace:
        emit_pathloss_trace(
            channel_config(spec),
            constellation_config(spec),
            out.pathloss_trace,
            out.trace_samples,
            out.trace_max_ground_distance_km * 1000.0,
        )
    events: list | None = [] if out.events else None
    records = run_campaign(campaign_configs(spec), workers=out.workers, events=events)
    emit_results(records, out.results)
    if events is not None:
        emit_events(events, out.events)
    return records


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = resolve_spec(args)
        if args.dump_config:
            sys.stdout.write(format_config(spec))
            return 0
        run(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, DomainError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
