"""Feedback control of interacting stochastic spins via value-function Monte Carlo."""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalFailure, SpinctrlError  # noqa: F401
