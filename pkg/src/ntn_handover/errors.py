"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid configuration value or combination of values."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""
