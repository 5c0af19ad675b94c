"""
errors.py

This module defines the exceptions and warning categories raised by the toolkit.
"""


class ActiveInferenceError(Exception):
    """Base class for every error raised by the toolkit."""


# MODEL ERRORS

class ShapeMismatch(ActiveInferenceError, ValueError):
    """Array dimensions disagree with each other or with the model."""


class NotStochastic(ActiveInferenceError, ValueError):
    """A distribution has negative entries or does not sum to one."""


class NonFinite(ActiveInferenceError, ValueError):
    """NaN or infinity found where a finite number is required."""


class IndexOutOfRange(ActiveInferenceError, IndexError):
    """An action, observation or state index is outside the model."""


# NUMERICAL ERRORS

class NumericallySingular(ActiveInferenceError, ArithmeticError):
    """The successor operator (I - gamma * B~^T) cannot be inverted reliably."""

    hint = "adjust gamma"


class DivergentSeries(ActiveInferenceError, ArithmeticError):
    """A geometric series was requested with gamma >= 1."""


class NonPositiveLikelihood(ActiveInferenceError, ValueError):
    """A likelihood entry is zero or negative where a log is taken."""


# PLANNING ERRORS

class ExplosionCap(ActiveInferenceError, ValueError):
    """The number of policies U^H exceeds the configured cap."""


# CONFIGURATION ERRORS

class InvalidSpec(ActiveInferenceError, ValueError):
    """A grid specification violates its invariants."""


class UnknownField(ActiveInferenceError, ValueError):
    """A dump request names a field that does not exist."""


class ConfigError(ActiveInferenceError, ValueError):
    """
    A run configuration value is missing, unknown or invalid.

    Args:
        key (str): The offending configuration key.
        reason (str): What is wrong with it.
    """
    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")


# WARNINGS

class NumericalWarning(UserWarning):
    """Base class for recoverable numerical conditions."""


class ZeroEvidenceWarning(NumericalWarning):
    """An observation had (numerically) zero probability under the model."""


class UnderflowWarning(NumericalWarning):
    """A backward recursion produced entries below 1e-300."""


class HeuristicDiscountWarning(NumericalWarning):
    """gamma >= 1 was used; occupancy invariants no longer hold."""
