"""Variance minimization over the ancilla angles (theta0, theta1, phi).

With E(theta0, theta1, phi) the generalized two-qubit expectation, the
objective is E^2 = 1 - variance (lambda = 1).  E only depends on the data
through three weighted sums (see :class:`qkclf.kernels.KernelSums`), so every
derivative here is a closed form in sines and cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import LabeledDataset
from .kernels import KernelSums, expectation_from_sums, kernel_sums

FLAG_TOL = 1e-12


def _parts(s: KernelSums, t0, t1, phi):
    s0, c0, s1, c1 = math.sin(t0), math.cos(t0), math.sin(t1), math.cos(t1)
    sp, cp = math.sin(phi), math.cos(phi)
    A, R, I = s.label_sum, s.real_sum, s.imag_sum
    B = cp * R - sp * I
    dB = -sp * R - cp * I
    E = A * c0 * c1 - s0 * s1 * B
    grad = np.array([
        -A * s0 * c1 - c0 * s1 * B,
        -A * c0 * s1 - s0 * c1 * B,
        -s0 * s1 * dB,
    ])
    d00 = -A * c0 * c1 + s0 * s1 * B
    d01 = A * s0 * s1 - c0 * c1 * B
    d0p = -c0 * s1 * dB
    d1p = -s0 * c1 * dB
    dpp = s0 * s1 * B  # d2B/dphi2 = -B
    hess = np.array([[d00, d01, d0p], [d01, d00, d1p], [d0p, d1p, dpp]])
    return E, grad, hess


def objective(data: LabeledDataset, theta0, theta1, phi, variant: str = "STC", copies: int = 1) -> float:
    """Squared generalized expectation; equals 1 - variance for lambda = 1."""
    E = expectation_from_sums(kernel_sums(data, variant, copies), theta0, theta1, phi)
    return float(E * E)


def gradient(data: LabeledDataset, theta0, theta1, phi, variant: str = "STC", copies: int = 1) -> np.ndarray:
    E, dE, _ = _parts(kernel_sums(data, variant, copies), theta0, theta1, phi)
    return 2.0 * E * dE


def hessian(data: LabeledDataset, theta0, theta1, phi, variant: str = "STC", copies: int = 1) -> np.ndarray:
    """3x3 Hessian of the objective in (theta0, theta1, phi)."""
    E, dE, d2E = _parts(kernel_sums(data, variant, copies), theta0, theta1, phi)
    return 2.0 * (np.outer(dE, dE) + E * d2E)


@dataclass(frozen=True)
class CriticalPointReport:
    angles: tuple[float, float, float]
    gradient: np.ndarray
    hessian: np.ndarray
    score_sum: float
    label_sum: float
    second_derivative_test: bool
    determinant_test: bool
    datum_condition: bool
    classification_valid: bool

    @property
    def local_max_certified(self) -> bool:
        return self.second_derivative_test and self.determinant_test

    @property
    def determinant(self) -> float:
        return float(self.hessian[0, 0] * self.hessian[1, 1] - self.hessian[0, 1] ** 2)


def hessian_test(
    data: LabeledDataset,
    theta0: float,
    theta1: float,
    phi: float,
    variant: str = "STC",
    copies: int = 1,
    full: bool = False,
) -> CriticalPointReport:
    """Second-derivative test in (theta0, theta1).

    The 2x2 block is reported when sin(phi) = 0, the 3x3 Hessian otherwise or
    when ``full`` is set.  The two flags test

    * d2f/dtheta0^2 = d2f/dtheta1^2 <= 0, and
    * d2f/dtheta0^2 * d2f/dtheta1^2 - (d2f/dtheta0 dtheta1)^2 > 0.

    ``datum_condition`` is |sum a_j (-1)^y_j k_j| > |sum a_j (-1)^y_j|, under
    which the Hadamard point is the local maximum.
    """
    sums = kernel_sums(data, variant, copies)
    E, dE, d2E = _parts(sums, theta0, theta1, phi)
    grad = 2.0 * E * dE
    hess = 2.0 * (np.outer(dE, dE) + E * d2E)
    if not full and abs(math.sin(phi)) < FLAG_TOL:
        hess = hess[:2, :2]
    h00, h11, h01 = hess[0, 0], hess[1, 1], hess[0, 1]
    second = h00 <= FLAG_TOL and h11 <= FLAG_TOL and abs(h00 - h11) <= FLAG_TOL
    det = h00 * h11 - h01 * h01
    data_independent = abs(math.sin(theta0)) < FLAG_TOL and abs(math.sin(theta1)) < FLAG_TOL
    f = sums.real_sum
    return CriticalPointReport(
        angles=(theta0, theta1, phi),
        gradient=grad,
        hessian=hess,
        score_sum=f,
        label_sum=sums.label_sum,
        second_derivative_test=bool(second),
        determinant_test=bool(det > FLAG_TOL),
        datum_condition=abs(f) > abs(sums.label_sum),
        classification_valid=not data_independent and abs(f) >= FLAG_TOL,
    )


@dataclass(frozen=True)
class AngleScan:
    """Objective and variance on a (theta0, theta1, phi) grid.

    Arrays are indexed [i0, i1, ip] in grid order.
    """

    theta0: np.ndarray
    theta1: np.ndarray
    phi: np.ndarray
    objective: np.ndarray
    variance: np.ndarray

    @property
    def best_index(self) -> tuple[int, int, int]:
        return tuple(int(i) for i in np.unravel_index(np.argmax(self.objective), self.objective.shape))

    @property
    def best(self) -> tuple[float, float, float, float]:
        i, j, k = self.best_index
        return (float(self.theta0[i]), float(self.theta1[j]), float(self.phi[k]), float(self.objective[i, j, k]))

    def rows(self):
        for i, t0 in enumerate(self.theta0):
            for j, t1 in enumerate(self.theta1):
                for k, p in enumerate(self.phi):
                    yield float(t0), float(t1), float(p), float(self.objective[i, j, k]), float(self.variance[i, j, k])


def uniform_grid(steps: int) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, steps)


def angle_scan(
    data: LabeledDataset,
    theta0: Sequence[float],
    theta1: Sequence[float],
    phi: Sequence[float],
    variant: str = "STC",
    copies: int = 1,
) -> AngleScan:
    t0 = np.asarray(theta0, dtype=float).reshape(-1)
    t1 = np.asarray(theta1, dtype=float).reshape(-1)
    ph = np.asarray(phi, dtype=float).reshape(-1)
    if not (t0.size and t1.size and ph.size):
        raise ValueError("angle grid must be nonempty")
    E = expectation_from_sums(
        kernel_sums(data, variant, copies), t0[:, None, None], t1[None, :, None], ph[None, None, :]
    )
    obj = E * E
    return AngleScan(t0, t1, ph, obj, 1.0 - obj)
