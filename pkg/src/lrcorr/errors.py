"""Typed errors raised by the estimation, power and simulation layers."""


class DatasetError(ValueError):
    """A dataset violates a structural invariant."""


class EmptyArmError(DatasetError):
    """One of the two arms has no subjects."""


class NegativeTimeError(DatasetError):
    """An observed time is negative or non-finite."""


class UnknownStatusError(DatasetError):
    """A status value is not 0 or 1."""


class RaggedEndpointsError(DatasetError):
    """A subject is missing a value for some endpoint."""


class NoEventsError(ValueError):
    """An endpoint has zero events."""


class ZeroVarianceError(ValueError):
    """The log-rank variance is zero; no standardized statistic exists."""


class ZeroDenominatorError(ValueError):
    """An influence column is degenerate (zero variance)."""


class NotPSDError(ValueError):
    """A correlation matrix is indefinite and was not repaired."""


class DomainError(ValueError):
    """A scalar argument is outside its mathematical domain."""


class BadThetaError(DomainError):
    """A copula dependence parameter is outside the family's range."""


class InsufficientEventsError(RuntimeError):
    """A simulated trial can never reach its target event count."""
