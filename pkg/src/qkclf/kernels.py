"""Closed-form kernels and classification scores.

These are the analytic counterparts of the circuit simulation in
:mod:`qkclf.circuits`, and serve as its ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import qstate
from .circuits import ClassifierSpec, LabeledDataset
from .errors import DimensionMismatch, MixedStateUnsupported
from .qstate import State, StateVector

ABSTAIN_TOL = 1e-12


def _check_dims(a: State, b: State):
    if a.dim != b.dim:
        raise DimensionMismatch(f"state dims differ: {a.dim} vs {b.dim}")


def htc_kernel(x: StateVector, x_test: StateVector) -> float:
    """Re <x|x~>."""
    if not isinstance(x, StateVector) or not isinstance(x_test, StateVector):
        raise MixedStateUnsupported("HTC kernel is defined for pure states only")
    return qstate.inner_product(x, x_test).real


def stc_kernel(rho: State, rho_test: State, k: int = 1) -> float:
    """Tr(rho~ rho)^k; for pure inputs |<x~|x>|^(2k)."""
    _check_dims(rho, rho_test)
    if k < 1:
        raise ValueError("copies must be >= 1")
    if isinstance(rho, StateVector) and isinstance(rho_test, StateVector):
        overlap = abs(qstate.inner_product(rho_test, rho)) ** 2
    else:
        a = qstate.to_density(rho).entries
        b = qstate.to_density(rho_test).entries
        overlap = float(np.einsum("ij,ji->", b, a).real)
    return overlap**k


def kernel_values(data: LabeledDataset, spec: ClassifierSpec) -> tuple[float, ...]:
    if spec.variant == "HTC":
        return tuple(htc_kernel(x, data.test) for x in data.training)
    return tuple(stc_kernel(x, data.test, spec.copies) for x in data.training)


def assign_label(f: float, tol: float = ABSTAIN_TOL) -> Optional[int]:
    """(1 - sgn f)/2, or None (abstain) when |f| < tol."""
    if abs(f) < tol:
        return None
    return 0 if f > 0 else 1


@dataclass(frozen=True)
class ScoreReport:
    score: float
    kernels: tuple[float, ...]
    expectation: float
    label: Optional[int]
    lam: int = 1

    @property
    def abstain(self) -> bool:
        return self.label is None


def _signed_sum(data: LabeledDataset, values: Sequence[float]) -> float:
    return math.fsum(a * (-1) ** y * v for a, y, v in zip(data.weights, data.labels, values))


def classification_score(data: LabeledDataset, spec: ClassifierSpec) -> ScoreReport:
    kernels = kernel_values(data, spec)
    f = _signed_sum(data, kernels)
    return ScoreReport(f, kernels, spec.label_width * f, assign_label(f), spec.label_width)


@dataclass(frozen=True)
class KernelSums:
    """Signed, weighted sums that fully determine the generalized expectation.

    label_sum  = sum_j a_j (-1)^y_j
    real_sum   = sum_j a_j (-1)^y_j Re k_j   (HTC: Re<x_j|x~>, STC: fidelity^k)
    imag_sum   = sum_j a_j (-1)^y_j Im<x_j|x~>  (always 0 for STC)
    """

    label_sum: float
    real_sum: float
    imag_sum: float


def kernel_sums(data: LabeledDataset, variant: str = "STC", copies: int = 1) -> KernelSums:
    variant = variant.upper()
    label_sum = _signed_sum(data, [1.0] * data.M)
    if variant == "HTC":
        if not data.is_pure:
            raise MixedStateUnsupported("HTC needs pure states")
        overlaps = [qstate.inner_product(x, data.test) for x in data.training]
        return KernelSums(
            label_sum,
            _signed_sum(data, [o.real for o in overlaps]),
            _signed_sum(data, [o.imag for o in overlaps]),
        )
    ks = [stc_kernel(x, data.test, copies) for x in data.training]
    return KernelSums(label_sum, _signed_sum(data, ks), 0.0)


def expectation_from_sums(sums: KernelSums, theta0, theta1, phi):
    """cos t0 cos t1 A - sin t0 sin t1 (cos phi R - sin phi I); numpy-broadcastable."""
    return np.cos(theta0) * np.cos(theta1) * sums.label_sum - np.sin(theta0) * np.sin(theta1) * (
        np.cos(phi) * sums.real_sum - np.sin(phi) * sums.imag_sum
    )


def general_expectation(
    data: LabeledDataset, angles: Sequence[float], variant: str = "STC", copies: int = 1
) -> float:
    """<sigma_z^(a) sigma_z^(l)> for arbitrary preparation/interference angles."""
    theta0, theta1, phi = angles
    return float(expectation_from_sums(kernel_sums(data, variant, copies), theta0, theta1, phi))


def general_observable_expectation(data: LabeledDataset, spec: ClassifierSpec) -> float:
    """<sigma_z^(a) (x) A_lam> with A_lam = sum of Z over the label repetition code."""
    return spec.label_width * general_expectation(data, spec.angles, spec.variant, spec.copies)
