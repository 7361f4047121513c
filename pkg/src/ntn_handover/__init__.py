"""System-level simulator for handover in a LEO satellite network."""

from .channel import ChannelConfig, EnvironmentLookup, ShadowFadingMode
from .engine import DropResult, SimConfig, run_campaign, run_drop, seeded_stream, sweep_configs
from .errors import ConfigError, DomainError
from .geometry import ConstellationConfig
from .handover import Distance, Elevation, Measurement, Timer, make_mechanism
from .mobility import MobilityConfig, MobilityMode
from .monitor import MetricsRecord

__version__ = "0.1.0"
