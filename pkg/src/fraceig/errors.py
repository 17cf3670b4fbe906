"""Exception types shared across the package."""


class FracEigError(Exception):
    """Base class for all package errors."""


class InvalidDomainError(FracEigError, ValueError):
    """Raised for degenerate or empty interval data."""


class EmptyDomainError(FracEigError, ValueError):
    """Raised when a set operation produces an empty open set."""


class InvalidScaleError(FracEigError, ValueError):
    """Raised for non-positive scaling factors."""


class InvalidParameterError(FracEigError, ValueError):
    """Raised for parameters outside their validity range (s, q, tolerances...)."""


class EmptyGridError(FracEigError, ValueError):
    """Raised when a grid spec yields zero cells."""


class GridMismatchError(FracEigError, ValueError):
    """Raised when a nodal vector does not belong to the form it is used with."""


class ConvergenceError(FracEigError, RuntimeError):
    """Solver failed to converge; carries the last iterate.

    Attributes
    ----------
    last_result : the best EigenSolveResult (or LaneEmdenResult) reached.
    """

    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result


class ConfigError(FracEigError, ValueError):
    """Bad experiment/CLI configuration (exit code 64)."""
