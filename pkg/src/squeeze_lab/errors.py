"""Exception types raised by squeeze_lab."""


class SqueezeLabError(Exception):
    """Base class for all library errors."""


class DomainError(SqueezeLabError, ValueError):
    """An argument lies outside the set where the operation is defined."""


class NotBalancedError(DomainError):
    """The domain is not d-balanced for the requested degree vector."""


class BracketingFailed(SqueezeLabError):
    """The bisection bracket [0, T_max] did not contain the gauge crossing."""


class CertificateSearchFailed(SqueezeLabError):
    """Neither an inside certificate nor a separating direction could be produced."""


class CertificationFailed(SqueezeLabError):
    """A numerical certification found a counterexample point.

    The offending point is kept on ``self.point``.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EmptyCompactSet(SqueezeLabError):
    """A compact-set sample contained no points."""
