"""Semantic exception hierarchy.

Public functions raise these instead of bare ValueError so callers can
distinguish bad configuration from bad data from failed model fits.
"""


class RecalError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(RecalError):
    """A configuration object or config file is invalid."""


class DomainError(RecalError):
    """An input value lies outside the mathematical domain of an operation."""


class FitError(RecalError):
    """A model fit could not be performed (degenerate input, no convergence)."""


class IngestionError(RecalError):
    """An external prediction file failed validation; names the offending row."""
