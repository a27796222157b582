"""Exception hierarchy shared by every module of the package."""


class QkclfError(Exception):
    """Base class for all errors raised by qkclf."""


class ZeroVector(QkclfError, ValueError):
    pass


class DimensionMismatch(QkclfError, ValueError):
    pass


class NonHermitian(QkclfError, ValueError):
    pass


class MixedKind(QkclfError, TypeError):
    """Raised when pure and mixed states are combined where that is not allowed."""


class InvalidState(QkclfError, ValueError):
    pass


class MixedStateUnsupported(QkclfError, ValueError):
    pass


class WeightSumInvalid(QkclfError, ValueError):
    pass


class LayoutMismatch(QkclfError, ValueError):
    pass


class LabelWidthUnsupported(QkclfError, ValueError):
    pass


class NonLogicalLeakage(QkclfError, ValueError):
    """Probability mass found on label patterns outside the repetition code."""


class InvalidDistribution(QkclfError, ValueError):
    pass


class ScoreOutOfRange(QkclfError, ValueError):
    pass


class DegenerateDistribution(QkclfError, ValueError):
    pass


class UndecidableScore(QkclfError, ValueError):
    """The classification score is zero, so no shot budget can resolve its sign."""


class InsufficientShots(QkclfError, ValueError):
    pass


class RateOutOfRange(QkclfError, ValueError):
    pass


class InvalidCoefficients(QkclfError, ValueError):
    pass


class SignDestroyed(QkclfError, ValueError):
    """The noise channel maps every expectation value to zero."""


class ConfigInvalid(QkclfError, ValueError):
    """Experiment configuration failed validation.

    ``diagnostics`` holds one human readable message per violated rule.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
