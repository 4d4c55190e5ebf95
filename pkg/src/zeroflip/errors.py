"""Exception hierarchy."""


class ZeroFlipError(Exception):
    """Base class for every error raised by the package."""


class ConstraintViolation(ZeroFlipError, ValueError):
    """A constructor precondition does not hold."""


class DomainError(ZeroFlipError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(ZeroFlipError, ZeroDivisionError):
    """Evaluation hit the pole of a flipped function."""


class DivergenceError(ZeroFlipError, ArithmeticError):
    """An integral over an infinite tail does not converge."""


class ToleranceNotMet(ZeroFlipError, ArithmeticError):
    """A numerical routine could not reach its target accuracy.

    ``estimate`` carries the best value that was achieved and ``error`` the
    associated error bound.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
