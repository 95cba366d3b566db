"""Exception types raised across the package."""


class L1PenaltyError(Exception):
    """Base class for all package errors."""


class ConstantColumnError(L1PenaltyError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance")


class NonFiniteError(L1PenaltyError, ValueError):
    pass


class NotStandardizedError(L1PenaltyError, ValueError):
    pass


class DomainError(L1PenaltyError, ValueError):
    pass


class ExponentOverflowError(L1PenaltyError, ArithmeticError):
    """A linear predictor exceeded the exponent guard of the Poisson loss."""


class ZeroResidualError(L1PenaltyError, ArithmeticError):
    """Square-root lasso quantity undefined because the residual vanished."""


class InsufficientDrawsError(L1PenaltyError, ValueError):
    pass


class FoldTooSmallError(L1PenaltyError, ValueError):
    pass


class DataFormatError(L1PenaltyError, ValueError):
    """Malformed CSV input; ``row`` is 1-based within the file."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
