"""Exception types shared across the toolkit.

Everything raised on purpose derives from GenMetricsError so callers can
catch toolkit failures without also swallowing programming errors.
"""


class GenMetricsError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(GenMetricsError):
    """Input violates a documented precondition or invariant."""


class FormatError(GenMetricsError):
    """A feature file does not follow the expected layout."""


class TruncationError(FormatError):
    """Header-declared payload size disagrees with the file contents."""


class DimensionError(GenMetricsError):
    """Operands have incompatible shapes."""


class InsufficientSamplesError(GenMetricsError):
    """Too few points are available for the requested operation."""


class DomainError(GenMetricsError):
    """A numeric argument lies outside the mathematical domain."""


class SolverFailureError(GenMetricsError):
    """The transport solver hit its iteration cap without proving optimality."""


class UnsupportedError(GenMetricsError):
    """The requested configuration is outside the supported envelope."""


class ConfigError(GenMetricsError):
    """An experiment or CLI configuration is malformed."""
