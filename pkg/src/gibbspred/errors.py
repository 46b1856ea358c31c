"""Exception types raised by the numerical routines."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the function."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy.

    ``achieved`` holds the relative accuracy that was actually attained,
    when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PrecisionError(NumericalError):
    """Cancellation in an extended-precision sum swamped the working precision."""


class OutOfRangeError(NumericalError):
    """A computed probability fell outside the open unit interval."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value
