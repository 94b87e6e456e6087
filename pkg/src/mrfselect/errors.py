"""Exception hierarchy.

Every error raised by the package derives from :class:`MRFSelectError`. The CLI
maps ``DataError`` subclasses to exit code 3 and ``ComputationError``
subclasses to exit code 4.
"""


class MRFSelectError(Exception):
    pass


class DataError(MRFSelectError, ValueError):
    """Bad input data: symbols, margins, file formats."""


class ComputationError(MRFSelectError, RuntimeError):
    """A well-formed request that cannot be computed."""


class InvalidSymbol(DataError):
    pass


class InvalidMargin(DataError):
    pass


class MarginMismatch(DataError):
    pass


class SupportMismatch(DataError):
    pass


class FormatError(DataError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", column {col}"
            where = f" ({where})"
        super().__init__(message + where)


class EnumerationTooLarge(ComputationError):
    pass


class PenaltyOverflow(ComputationError):
    pass


class ModelTooLarge(ComputationError):
    pass


class ZeroProbabilityCondition(ComputationError):
    pass


class MarkovIntersectionViolation(ComputationError):
    def __init__(self, message: str, vertex: int | None = None, witness=None):
        self.vertex = vertex
        self.witness = witness
        super().__init__(message)
