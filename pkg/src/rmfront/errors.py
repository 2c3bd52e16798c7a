"""Exception hierarchy shared by every module of the package."""


class RMFrontError(Exception):
    """Base class for all package errors."""


class InvalidInput(RMFrontError, ValueError):
    """Arguments violate an operation's preconditions."""


class DomainError(RMFrontError, ValueError):
    """A formula was evaluated outside its domain (pole, negative radicand)."""


class IntegrationFailure(RMFrontError):
    """Adaptive integration could not proceed (step size underflow)."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class ContinuationFailure(RMFrontError):
    """A boundary-value solve failed at some continuation step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class FrontQualityError(RMFrontError):
    """A computed front is inconsistent with the known a priori bounds."""


class SplittingDegenerate(RMFrontError):
    """An asymptotic eigenvalue sits on the imaginary axis."""


class UnresolvedWinding(RMFrontError):
    """Contour refinement ran out of depth before the phase was resolved."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class NonComparable(RMFrontError):
    """Two runs cannot be compared (different weights or contours)."""
