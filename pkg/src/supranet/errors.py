"""Exception hierarchy shared by all supranet modules."""

from __future__ import annotations


class SupranetError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SupranetError, ValueError):
    """An argument violates a documented precondition."""


class GraphError(ParameterError):
    """Invalid edge data. ``lineno`` is set when the edge came from a file."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class IndexOutOfRange(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class ParseError(GraphError):
    pass


class GenerationFailed(SupranetError, RuntimeError):
    """A random generator exhausted its retry budget."""


class DimensionLimit(SupranetError, ValueError):
    pass


class NotSymmetric(SupranetError, ValueError):
    pass


class ConvergenceFailure(SupranetError, RuntimeError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class StabilityViolation(SupranetError, ValueError):
    pass


class NonOrthogonalInitial(SupranetError, ValueError):
    pass


class EmptyInterlinks(SupranetError, ValueError):
    pass


class SingularSystem(SupranetError, ValueError):
    pass


class InsufficientData(SupranetError, ValueError):
    pass
