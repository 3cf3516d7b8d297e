"""Exception types that map onto the CLI exit codes."""


class SpinctrlError(Exception):
    """Base class for library errors."""


class ConfigError(SpinctrlError):
    """Malformed scenario, config file or argument combination (exit code 2)."""


class NumericalFailure(SpinctrlError):
    """Estimator or integrator breakdown, e.g. total underflow (exit code 3)."""
