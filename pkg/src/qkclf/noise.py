"""Pauli noise on the final classifier state and its effect on the score.

Pauli strings are written qubit 0 first, and qubit 0 is the ancilla in every
classifier layout.  Strings shorter than the state are padded with identities
on the right, so ``"X"`` means a bit flip on the ancilla only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import qstate
from .errors import DimensionMismatch, InvalidCoefficients, RateOutOfRange, SignDestroyed
from .moments import ceil_count
from .qstate import DensityMatrix, State

COEFF_TOL = 1e-12
SCALE_ZERO_TOL = 1e-12


def depolarizing_kraus(p: float) -> list[np.ndarray]:
    _check_rate(p)
    return [
        math.sqrt(1 - 3 * p / 4) * qstate.I2,
        math.sqrt(p / 4) * qstate.X,
        math.sqrt(p / 4) * qstate.Y,
        math.sqrt(p / 4) * qstate.Z,
    ]


def _check_rate(p: float):
    if not 0.0 <= p <= 1.0:
        raise RateOutOfRange(f"depolarizing rate {p!r} outside [0, 1]")


@dataclass(frozen=True)
class NoiseSpec:
    """Either an ancilla depolarizing rate or an explicit Pauli mixture."""

    depolarizing: Optional[float] = None
    terms: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if (self.depolarizing is None) == (not self.terms):
            raise InvalidCoefficients("give exactly one of a depolarizing rate or Pauli terms")
        if self.depolarizing is not None:
            _check_rate(float(self.depolarizing))
            object.__setattr__(self, "depolarizing", float(self.depolarizing))
            return
        terms = tuple((str(s).upper(), float(c)) for s, c in self.terms)
        for s, c in terms:
            if not s or set(s) - set("IXYZ"):
                raise InvalidCoefficients(f"invalid Pauli string {s!r}")
            if c < 0:
                raise InvalidCoefficients(f"negative coefficient {c!r} for {s}")
        if abs(math.fsum(c for _, c in terms) - 1.0) > COEFF_TOL:
            raise InvalidCoefficients("Pauli coefficients must sum to 1")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def depolarizing_ancilla(cls, p: float) -> "NoiseSpec":
        return cls(depolarizing=p)

    @classmethod
    def pauli(cls, terms) -> "NoiseSpec":
        if isinstance(terms, dict):
            terms = terms.items()
        return cls(terms=tuple(terms))

    def pauli_terms(self) -> tuple[tuple[str, float], ...]:
        """Pauli mixture form; depolarizing becomes {I: 1-3p/4, X/Y/Z: p/4}."""
        if self.depolarizing is None:
            return self.terms
        p = self.depolarizing
        return (("I", 1 - 3 * p / 4), ("X", p / 4), ("Y", p / 4), ("Z", p / 4))

    @property
    def max_qubits(self) -> int:
        return max(len(s) for s, _ in self.pauli_terms())


def _ancilla(state: State) -> int:
    try:
        return state.register_qubits("ancilla")[0]
    except KeyError:
        return 0


def depolarize_ancilla(rho: State, p: float) -> DensityMatrix:
    """Kraus sum over {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z} on the ancilla."""
    rho = qstate.to_density(rho)
    a = _ancilla(rho)
    out = sum(qstate.apply_single_qubit(rho, E, a).entries for E in depolarizing_kraus(p))
    return DensityMatrix._trusted(out, rho.layout)


def apply_pauli_channel(rho: State, spec: NoiseSpec) -> DensityMatrix:
    """sum_j c_j P_j rho P_j^dagger."""
    rho = qstate.to_density(rho)
    n = rho.num_qubits
    out = np.zeros_like(rho.entries)
    for label, c in spec.pauli_terms():
        if len(label) > n:
            raise DimensionMismatch(f"Pauli string {label!r} longer than the {n}-qubit state")
        if c == 0.0:
            continue
        out += c * qstate.apply_pauli_string(rho, label.ljust(n, "I")).entries
    return DensityMatrix._trusted(out, rho.layout)


def apply_noise(rho: State, spec: NoiseSpec) -> DensityMatrix:
    if spec.depolarizing is not None:
        return depolarize_ancilla(rho, spec.depolarizing)
    return apply_pauli_channel(rho, spec)


@dataclass(frozen=True)
class ScaleReport:
    scale: float
    c_i: float
    c_x: float
    c_y: float
    c_z: float

    @property
    def sign_inverted(self) -> bool:
        return self.scale < -SCALE_ZERO_TOL

    @property
    def multiplier(self) -> Optional[float]:
        """Repetition multiplier 1/s^2, or None when s = 0."""
        if abs(self.scale) < SCALE_ZERO_TOL:
            return None
        return 1.0 / self.scale**2


def effective_scale(spec: NoiseSpec) -> ScaleReport:
    """s = C_I + C_Z - C_X - C_Y, grouping coefficients by their ancilla factor."""
    sums = {"I": [], "X": [], "Y": [], "Z": []}
    for label, c in spec.pauli_terms():
        sums[label[0]].append(c)
    ci, cx, cy, cz = (math.fsum(sums[k]) for k in "IXYZ")
    if spec.depolarizing is not None:
        scale = 1.0 - spec.depolarizing
    else:
        scale = ci + cz - cx - cy
    return ScaleReport(scale, ci, cx, cy, cz)


@dataclass(frozen=True)
class OverheadReport:
    scale: float
    multiplier: float
    planned_shots: Optional[int]
    sign_inverted: bool

    @property
    def corrective(self) -> Optional[str]:
        if self.sign_inverted:
            return "negate the decision rule: the channel flips the sign of the expectation"
        return None


def noise_overhead(scale: float, base_shots: Optional[int] = None) -> OverheadReport:
    """Shot multiplier 1/s^2 needed to restore noiseless confidence.

    A negative scale is reported, not corrected.
    """
    if abs(scale) < SCALE_ZERO_TOL:
        raise SignDestroyed("noise scale is zero; the score sign cannot be recovered")
    mult = 1.0 / (scale * scale)
    planned = None if base_shots is None else ceil_count(base_shots / (scale * scale))
    return OverheadReport(scale, mult, planned, scale < 0)
