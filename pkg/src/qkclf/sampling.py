"""Finite-shot sampling of the four measurement outcomes and decision rules.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=(stream,))``, so a (seed, stream) pair always
reproduces the same counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuits import OutcomeDistribution
from .errors import InsufficientShots, InvalidDistribution, LabelWidthUnsupported
from .moments import MomentsReport, _skew

DEFAULT_SHOTS = 8192


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


@dataclass(frozen=True)
class ShotRecord:
    """Counts for outcomes ordered (0,0), (0,1), (1,0), (1,1)."""

    counts: tuple[int, int, int, int]
    seed: Optional[int] = None
    stream: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 4 or min(counts) < 0:
            raise InvalidDistribution("need four nonnegative counts")
        object.__setattr__(self, "counts", counts)

    @property
    def shots(self) -> int:
        return sum(self.counts)

    @property
    def plus(self) -> int:
        """Shots whose product outcome (-1)^(i+j) is +1."""
        return self.counts[0] + self.counts[3]

    @property
    def minus(self) -> int:
        return self.counts[1] + self.counts[2]

    def mean(self, lam: int = 1) -> float:
        return lam * (self.plus - self.minus) / self.shots


def sample(p: OutcomeDistribution, shots: int = DEFAULT_SHOTS, seed: int = 0, stream: int = 0) -> ShotRecord:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not isinstance(p, OutcomeDistribution):
        p = OutcomeDistribution(tuple(p))
    pvals = p.as_array() / p.as_array().sum()
    counts = make_rng(seed, stream).multinomial(shots, pvals)
    return ShotRecord(tuple(counts), seed, stream)


def decide_mean(record: ShotRecord, lam: int = 1) -> Optional[int]:
    """Sign of the empirical mean; None on an exact zero."""
    if record.shots < 1:
        raise InsufficientShots("no shots recorded")
    diff = record.plus - record.minus
    if diff == 0:
        return None
    return 0 if diff > 0 else 1


def decide_majority(record: ShotRecord, lam: int = 1) -> Optional[int]:
    """Most frequent product outcome; None on a tie."""
    if lam != 1:
        raise LabelWidthUnsupported("majority vote is defined for a one-qubit label")
    if record.shots < 1:
        raise InsufficientShots("no shots recorded")
    if 2 * record.plus > record.shots:
        return 0
    if 2 * record.plus < record.shots:
        return 1
    return None


def empirical_moments(record: ShotRecord, lam: int = 1) -> MomentsReport:
    """Plug-in moments from relative frequencies (population variance)."""
    n = record.shots
    if n < 2:
        raise InsufficientShots("need at least two shots for empirical moments")
    parity = (record.plus - record.minus) / n
    mean = lam * parity
    second = float(lam**2)
    third = lam**3 * parity
    variance = max(second - mean**2, 0.0)
    return MomentsReport(mean, second, variance, third, _skew(mean, variance, third), lam)
