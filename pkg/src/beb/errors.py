"""Exception hierarchy.

Input problems derive from ``ParameterError`` (CLI exit code 2), numerical
failures from ``NumericalFailure`` (exit code 3).
"""


class BebError(Exception):
    """Base class for all package errors."""


class ParameterError(BebError, ValueError):
    """Invalid or inconsistent input."""

    def __init__(self, message: str, constraint: str = ""):
        super().__init__(message)
        self.constraint = constraint


class NumericalFailure(BebError, RuntimeError):
    """A numerical procedure did not deliver a trustworthy result."""

    def __init__(self, message: str, **info):
        super().__init__(message)
        self.info = info


# parameter / domain errors
class DegenerateTau(ParameterError): ...
class DegenerateDelta(ParameterError): ...
class BadThetaOrder(ParameterError): ...
class TailMismatch(ParameterError): ...
class DomainError(ParameterError): ...
class OutOfDomain(ParameterError): ...
class ChartBoundary(ParameterError): ...
class NotSliding(ParameterError): ...
class BoundaryCase(ParameterError): ...
class NoSaddle(ParameterError): ...


# numerical errors
class EventConvergenceFailure(NumericalFailure): ...
class MaxSegments(NumericalFailure): ...
class StepFailure(NumericalFailure): ...
class Blowup(NumericalFailure): ...
class NoSignChange(NumericalFailure): ...
class NoReturn(NumericalFailure): ...
class NoConvergence(NumericalFailure): ...
class StallAtStep(NumericalFailure): ...
class NoRoot(NumericalFailure): ...
class SignConventionConflict(NumericalFailure): ...
class NoBracket(NumericalFailure): ...
class NonMonotone(NumericalFailure): ...
