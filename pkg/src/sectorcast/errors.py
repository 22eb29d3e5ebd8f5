"""Exception hierarchy.

Two families matter to callers: ``InputError`` (bad data or arguments, CLI
exit code 2) and ``NumericalError`` (the data are well-formed but the
numerics cannot proceed, CLI exit code 3).
"""


class SectorcastError(ValueError):
    exit_code = 1


class InputError(SectorcastError):
    exit_code = 2


class NumericalError(SectorcastError):
    exit_code = 3


# -- ingestion ---------------------------------------------------------------

class MissingColumn(InputError):
    def __init__(self, column, path=None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class UnparseableValue(InputError):
    def __init__(self, row, column, value):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"row {row}, column {column}: cannot parse {value!r}")


class NonFiniteValue(InputError):
    def __init__(self, row, column, value=None):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"row {row}, column {column}: non-finite value {value!r}")


class DuplicateWeek(InputError):
    def __init__(self, week, ticker=None):
        self.week, self.ticker = week, ticker
        who = f" for ticker {ticker}" if ticker else ""
        super().__init__(f"duplicate week {week}{who}")


class EmptyInput(InputError):
    pass


class LengthMismatch(InputError):
    pass


class ZeroDenominator(InputError):
    pass


class DatasetTooSmall(InputError):
    pass


class InvalidConfig(InputError):
    pass


# -- johnson / normality ---------------------------------------------------

class OutOfSupport(InputError):
    def __init__(self, x, lower, upper):
        self.x, self.lower, self.upper = x, lower, upper
        super().__init__(f"value {x!r} outside the open support ({lower}, {upper})")


class SampleTooSmall(InputError):
    pass


class SampleSizeOutOfRange(InputError):
    pass


class DegenerateSample(NumericalError):
    pass


class NoValidFit(NumericalError):
    pass


# -- regression ------------------------------------------------------------

class ZeroMarketVariance(NumericalError):
    pass


class ConstantColumn(NumericalError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} is constant")


class RankDeficient(NumericalError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"design matrix is rank deficient: column {column!r} "
                         "is linearly dependent on earlier columns")


class InsufficientObservations(InputError):
    pass


class UnfittableStart(InputError):
    pass


# -- validation metrics ----------------------------------------------------

class ZeroObserved(InputError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"observed value at index {index} is zero")


class ZeroPredictedNorm(NumericalError):
    pass


class ZeroTotalVariance(NumericalError):
    pass


class DegreesOfFreedomExhausted(InputError):
    pass


class FoldTooSmall(InputError):
    pass
