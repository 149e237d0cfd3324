"""Exception and warning types shared across the package."""


class TameOptError(Exception):
    """Base class for all package errors."""


class DomainError(TameOptError, ValueError):
    """A primitive was evaluated outside its declared domain."""


class NonLipschitzError(DomainError):
    """A derivative is unbounded at the query point (e.g. ``sqrt`` at 0)."""


class DimensionError(TameOptError, ValueError):
    """Shapes or arities do not match."""


class ParseError(TameOptError, ValueError):
    """Malformed text input. Carries the offending position and token."""

    def __init__(self, message, position=None, token=None):
        self.position = position
        self.token = token
        where = ""
        if position is not None:
            where = f" at position {position}"
            if token is not None:
                where += f" (token {token!r})"
        super().__init__(message + where)


class UndefinedError(TameOptError, ValueError):
    """A one-sided limit was requested where the function is nowhere defined."""


class EventuallyZeroError(TameOptError, ValueError):
    """Asymptotics were requested for a function that is eventually zero."""


class DegenerateError(TameOptError, ArithmeticError):
    """Arithmetic overflow while isolating roots."""


class ConvergenceError(TameOptError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class DivergenceError(TameOptError, RuntimeError):
    """Iterates left the configured bounded region."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class LineSearchFailure(TameOptError, RuntimeError):
    """Weak-Wolfe line search could not bracket an acceptable step."""


class OrderTooSmall(TameOptError, ValueError):
    """Relaxation order is below half the degree of some polynomial."""


class NumericalFailure(TameOptError, RuntimeError):
    """The SDP solver broke down; ``residuals`` holds the last residual report."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class NonLipschitzWarning(UserWarning):
    """A primitive with unbounded local slope was detected near the query point."""
