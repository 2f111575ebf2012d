"""Exception hierarchy shared by every module."""


class NumericsError(Exception):
    """Base class for all library errors."""


class InvalidCutoff(NumericsError, ValueError):
    pass


class DomainError(NumericsError, ValueError):
    pass


class NotPositiveSemidefinite(NumericsError):
    pass


class TruncationError(NumericsError):
    """Raised when a state leaks too much weight past the retained basis."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class NumericInconsistency(NumericsError):
    pass


class NoPhysicalReference(NumericsError):
    """Covariance below the Heisenberg limit: no Gaussian state carries it."""


class EntropyUndefined(NumericsError):
    pass


class ModeMismatch(NumericsError, ValueError):
    pass
