"""Exact moments of the +/-lambda measurement and Chebyshev shot planning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .circuits import OutcomeDistribution
from .errors import DegenerateDistribution, ScoreOutOfRange, UndecidableScore

DEFAULT_DELTA = 0.05
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class MomentsReport:
    mean: float
    second_moment: float
    variance: float
    third_moment: float
    skewness: Optional[float]
    lam: int

    @property
    def degenerate(self) -> bool:
        """True when the variance vanishes and skewness is undefined."""
        return self.skewness is None

    @property
    def score(self) -> float:
        return self.mean / self.lam


def _skew(mean: float, variance: float, third: float) -> Optional[float]:
    if variance <= _DEGENERATE_TOL:
        return None
    return (third - 3 * mean * variance - mean**3) / variance**1.5


def moments_from_distribution(p: OutcomeDistribution, lam: int = 1) -> MomentsReport:
    """Moments of M_lam, whose eigenvalue on outcome (i, j) is (-1)^(i+j) lam."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    p00, p01, p10, p11 = p.probs
    parity = p00 - p01 - p10 + p11
    mean = lam * parity
    # every eigenvalue squares to lam^2, so M_lam^2 = lam^2 I exactly
    second = float(lam**2)
    third = lam**3 * parity
    variance = max(second - mean**2, 0.0)
    return MomentsReport(mean, second, variance, third, _skew(mean, variance, third), lam)


def _check_score(f: float):
    if not -1.0 - 1e-12 <= f <= 1.0 + 1e-12:
        raise ScoreOutOfRange(f"score {f!r} outside [-1, 1]")


def variance_of_score(f: float, lam: int = 1) -> float:
    """lam^2 (1 - f^2)."""
    _check_score(f)
    return lam**2 * max(1.0 - f * f, 0.0)


def skewness_of_score(f: float) -> float:
    """-2 f / sqrt(1 - f^2); independent of lam."""
    _check_score(f)
    if 1.0 - abs(f) <= _DEGENERATE_TOL:
        raise DegenerateDistribution("skewness is undefined at |f| = 1 (zero variance)")
    return -2.0 * f / math.sqrt(1.0 - f * f)


def ceil_count(x: float) -> int:
    """Ceiling that ignores floating-point dust (e.g. 120.00000000000001 -> 120)."""
    return max(1, math.ceil(round(x, 9)))


@dataclass(frozen=True)
class ShotPlan:
    score: float
    lam: int
    c: float
    delta: float
    mean: float
    variance: float
    epsilon: float
    shots: int


def plan_shots(f: float, lam: int = 1, c: float = 2.0, delta: float = DEFAULT_DELTA) -> ShotPlan:
    """Repetitions needed so that P[|mean - <M>| >= <M>/c] <= delta (Chebyshev).

    shots = ceil(sigma^2 c^2 / (delta <M>^2)) = ceil((1 - f^2) c^2 / (delta f^2)).
    The lam^2 factors cancel, so the count does not depend on lam.
    """
    _check_score(f)
    if not c > 1:
        raise ValueError("precision ratio c must exceed 1")
    if not 0 < delta < 1:
        raise ValueError("failure bound delta must lie in (0, 1)")
    if abs(f) < _DEGENERATE_TOL:
        raise UndecidableScore("score is zero; no finite number of shots resolves its sign")
    mean = lam * f
    shots = ceil_count((1.0 - f * f) * c * c / (delta * f * f))
    return ShotPlan(f, lam, c, delta, mean, variance_of_score(f, lam), abs(mean) / c, shots)
