"""Exception hierarchy shared by all modules."""


class FlatDistError(Exception):
    """Base class for every error raised by flatdist."""


class MetricError(FlatDistError, ValueError):
    """A distance matrix is not a valid finite metric."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MeasureError(FlatDistError, ValueError):
    """A measure violates the preconditions of an operation."""


class NotProbabilityError(MeasureError):
    """The operation requires a probability measure."""


class NumericalError(FlatDistError, ArithmeticError):
    """Base for failures of an iterative numerical procedure."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConvergenceError(NumericalError):
    """An iteration cap was hit before the stopping rule was satisfied."""


class OracleError(FlatDistError, ValueError):
    """A brute-force oracle was asked for an instance that is too large."""
