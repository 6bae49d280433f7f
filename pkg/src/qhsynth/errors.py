"""Exception hierarchy shared by all modules."""


class QHSynthError(Exception):
    """Base class for library errors."""


class InvalidInputError(QHSynthError, ValueError):
    """Input rejected before any computation (shape, unitarity, range)."""


class DomainError(InvalidInputError):
    """Argument at or too close to a singularity of the evaluated function."""


class WrongRealizationError(InvalidInputError):
    """Factor cannot be realized by the requested pulse path."""


class UnsupportedFixtureError(InvalidInputError):
    """No literal decomposition data is available for the requested size."""


class UnsupportedRegimeError(InvalidInputError):
    """Closed-form propagator not available for these pulse parameters."""


class NumericalError(QHSynthError, ArithmeticError):
    """A numerical procedure failed to converge or drifted out of tolerance."""


class IntegratorError(NumericalError):
    """Time integration lost unitarity beyond the allowed drift."""


class ConsistencyError(QHSynthError, RuntimeError):
    """An internal post-condition failed.

    ``column`` holds the offending working column when one is available.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column
