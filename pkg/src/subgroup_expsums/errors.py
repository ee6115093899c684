"""Exception hierarchy.

``InvalidInput`` subclasses map to CLI exit code 2; ``CheckFailure`` subclasses
signal a violated inequality (a bug, since every check is theorem-backed) and
map to exit code 1.
"""


class ExpSumError(Exception):
    pass


class InvalidInput(ExpSumError, ValueError):
    pass


class NotPrime(InvalidInput):
    pass


class TooLarge(InvalidInput):
    pass


class IndexNotDividing(InvalidInput):
    pass


class ZeroArgument(InvalidInput):
    pass


class ZeroElement(InvalidInput):
    pass


class EmptySupport(InvalidInput):
    pass


class ModulusMismatch(InvalidInput):
    pass


class EmptySegment(InvalidInput):
    pass


class EtaTooSmall(InvalidInput):
    pass


class CheckFailure(ExpSumError):
    pass


class InequalityViolated(CheckFailure):
    pass


class BoundaryAmbiguity(CheckFailure):
    """A Fourier coefficient sits inside the guard band around a threshold."""


class LoopCapExceeded(CheckFailure):
    pass


class KCapExceeded(ExpSumError):
    """The k-sequence passed the configured cap before a valid k was found."""

    def __init__(self, k, cap):
        super().__init__(f"k={k} exceeds the configured cap {cap}")
        self.k = k
        self.cap = cap


class HypothesesFail(ExpSumError):
    def __init__(self, report):
        super().__init__("the correlation/smallness hypotheses do not hold for this measure and Delta")
        self.report = report


class HypothesesEffectivelyEmpty(CheckFailure):
    pass


class StageViolation(CheckFailure):
    def __init__(self, stage, record=None):
        super().__init__(f"stage {stage} violated" + (f": {record}" if record else ""))
        self.stage = stage
        self.record = record


class ExtractionFailed(CheckFailure):
    pass


class HypothesisAbsent(ExpSumError):
    """No frequency has the large coefficient needed by the incomplete-sum argument."""
