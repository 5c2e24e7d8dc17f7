"""Exception hierarchy shared by every module."""


class OpinionShiftError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(OpinionShiftError, ValueError):
    """Bad input: malformed graph, inconsistent leader sets, bad parameters."""


class ParseError(ValidationError):
    """An edge-list line could not be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NumericalError(OpinionShiftError, ArithmeticError):
    """A numeric kernel failed (singular system, divergence, bad pivot)."""


class SingularMatrixError(NumericalError):
    """Raised when a linear system is singular to working tolerance."""

    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class BudgetExceededError(OpinionShiftError):
    """Exhaustive search or iteration cap exceeded."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
