"""Exception types.  All derive from ValueError so callers can catch broadly."""


class DirwalkError(ValueError):
    pass


class NegativeEntry(DirwalkError):
    def __init__(self, i, j, value=None):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative entry at ({i}, {j}): {value!r}")


class RowSumOutOfTolerance(DirwalkError):
    def __init__(self, i, actual):
        self.i, self.actual = i, actual
        super().__init__(f"row {i} sums to {actual!r}")


class DimensionMismatch(DirwalkError):
    pass


class NotSquare(DirwalkError):
    pass


class NonPositiveShape(DirwalkError):
    pass


class AllZeroParams(DirwalkError):
    pass


class InvalidEnsemble(DirwalkError):
    pass


class ZeroParamWithPositiveOrder(DirwalkError):
    pass


class SumMismatch(DirwalkError):
    def __init__(self, t_sum, s_sum):
        self.t_sum, self.s_sum = t_sum, s_sum
        super().__init__(f"parameter totals differ: {t_sum!r} != {s_sum!r}")


class DegenerateSample(DirwalkError):
    pass


class TooFewSamples(DirwalkError):
    pass


class IndexOutOfRange(DirwalkError):
    pass
