"""Exception hierarchy.

Every error raised on purpose by the package derives from ``TeachsetError`` so
the command line can turn it into a one-line diagnostic.
"""


class TeachsetError(ValueError):
    """Base class for all package errors."""


# geometry
class EmptyDatasetError(TeachsetError):
    pass


class RaggedRowsError(TeachsetError):
    pass


class NonFiniteInputError(TeachsetError):
    pass


class PointOutsideBallError(TeachsetError):
    pass


class DimensionMismatchError(TeachsetError):
    pass


# density / surrogate
class IndexOutOfRangeError(TeachsetError):
    pass


class MetricMismatchError(TeachsetError):
    pass


class NPrimeOutOfRangeError(TeachsetError):
    pass


# halving
class EtaNonPositiveError(TeachsetError):
    pass


class AlreadySelectedError(TeachsetError):
    pass


class KOutOfRangeError(TeachsetError):
    pass


class TooSmallToHalveError(TeachsetError):
    pass


class TooManyHalvingsError(TeachsetError):
    pass


# teaching
class ConfigError(TeachsetError):
    pass


class TargetTooLargeError(TeachsetError):
    pass


class KExceedsPoolError(TeachsetError):
    pass


# evaluation
class LengthMismatchError(TeachsetError):
    pass


class NoLabelsError(TeachsetError):
    pass


class EmptyTrainingError(TeachsetError):
    pass


class ProbBelowFloorError(TeachsetError):
    pass


class EpsilonOutOfRangeError(TeachsetError):
    pass


# input parsing
class ParseError(TeachsetError):
    """A cell or line could not be parsed.

    ``row`` and ``col`` are 1-based file coordinates (``col`` may be None).
    """

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + where)


class NonNumericCellError(ParseError):
    pass


class MalformedLineError(ParseError):
    def __init__(self, message, line_no):
        self.line_no = line_no
        super().__init__(message, row=line_no)
