"""Exception hierarchy.

Validation problems derive from ``ValueError``; numerical breakdowns derive
from ``ArithmeticError`` so callers (and the CLI) can map them to exit codes
without enumerating every class.
"""


class MompcaError(Exception):
    pass


class ValidationError(MompcaError, ValueError):
    pass


class NumericalError(MompcaError, ArithmeticError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidData(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class InvalidBlockCount(ValidationError):
    pass


class InvalidRank(ValidationError):
    pass


class InvalidInputs(ValidationError):
    pass


class InvalidFraction(ValidationError):
    pass


class EmptyInlierSet(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class AssumptionViolated(ValidationError):
    def __init__(self, assumption, message):
        super().__init__(f"{assumption}: {message}")
        self.assumption = assumption


class RankDeficient(NumericalError):
    def __init__(self, column, message=None):
        super().__init__(message or f"column {column} is numerically dependent on its predecessors")
        self.column = column


class ConvergenceFailure(NumericalError):
    pass
