class KolmonetError(Exception):
    """Base class for all package errors."""


class ShapeError(KolmonetError, ValueError):
    """Layer shapes or input dimensions do not chain."""


class NumericError(KolmonetError, ArithmeticError):
    """A non-finite value appeared in a computation."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ArchitectureError(KolmonetError, ValueError):
    """Networks handed to a calculus operation violate its preconditions."""


class CalibrationError(KolmonetError, RuntimeError):
    """Calibration exhausted its budget; ``best`` holds the best constants found."""

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace or []
