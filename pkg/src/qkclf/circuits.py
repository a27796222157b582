"""Classifier state preparation, interference and final-measurement statistics.

Register layouts used throughout (ancilla is always qubit 0):

* HTC: ``ancilla | data | label | index``
* STC: ``ancilla | test_1 | train_1 | ... | test_k | train_k | label | index``

The ``index`` register has ``ceil(log2 M)`` qubits (zero for a single training
point).  Two simulation routes exist: the full-state route materializes the
index register exactly as written in the state formulas, and the branch route
simulates each training point separately and mixes the results with weights
``a_j``.  The branch route is what the analysis functions use; the full route
is kept as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import qstate
from .errors import (
    DimensionMismatch,
    InvalidDistribution,
    InvalidState,
    LabelWidthUnsupported,
    LayoutMismatch,
    MixedStateUnsupported,
    NonLogicalLeakage,
    WeightSumInvalid,
)
from .qstate import DensityMatrix, Observable, State, StateVector

HADAMARD_ANGLES = (math.pi / 2, math.pi / 2, math.pi)
WEIGHT_TOL = 1e-12
LEAKAGE_TOL = 1e-12
VARIANTS = ("HTC", "STC")


def ry(theta: float) -> np.ndarray:
    """R_y(theta) = cos(theta/2) I - i sin(theta/2) Y."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def prep_rotation(theta0: float, phi: float) -> np.ndarray:
    """Unitary mapping |0> to cos(theta0/2)|0> + e^{i phi} sin(theta0/2)|1>."""
    return np.diag([1.0, np.exp(1j * phi)]) @ ry(theta0)


@dataclass(frozen=True)
class ClassifierSpec:
    variant: str = "STC"
    copies: int = 1
    label_width: int = 1
    angles: tuple[float, float, float] = HADAMARD_ANGLES

    def __post_init__(self):
        variant = str(self.variant).upper()
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        object.__setattr__(self, "variant", variant)
        if int(self.copies) != self.copies or self.copies < 1:
            raise ValueError("copies must be a positive integer")
        if variant == "HTC" and self.copies != 1:
            raise ValueError("the Hadamard-test classifier uses exactly one copy")
        if int(self.label_width) != self.label_width or self.label_width < 1:
            raise ValueError("label_width must be a positive integer")
        angles = tuple(float(a) for a in self.angles)
        if len(angles) != 3:
            raise ValueError("angles must be (theta0, theta1, phi)")
        object.__setattr__(self, "angles", angles)

    def replace(self, **changes) -> "ClassifierSpec":
        from dataclasses import replace

        return replace(self, **changes)


def _coerce_state(s) -> State:
    if isinstance(s, (StateVector, DensityMatrix)):
        return s
    arr = np.asarray(s, dtype=complex)
    if arr.ndim == 2:
        return DensityMatrix(arr)
    return qstate.amplitude_encode(arr)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Training states with binary labels and weights, plus one test state.

    ``weights`` defaults to uniform ``1/M``.
    """

    training: tuple
    labels: tuple
    test: State
    weights: Optional[tuple] = None

    def __post_init__(self):
        training = tuple(_coerce_state(s) for s in self.training)
        if not training:
            raise ValueError("dataset must contain at least one training point")
        labels = tuple(int(y) for y in self.labels)
        if len(labels) != len(training):
            raise ValueError("need exactly one label per training point")
        if any(y not in (0, 1) for y in labels):
            raise ValueError("labels must be 0 or 1")
        test = _coerce_state(self.test)
        if self.weights is None:
            weights = tuple(1.0 / len(training) for _ in training)
        else:
            weights = tuple(float(a) for a in self.weights)
        if len(weights) != len(training):
            raise WeightSumInvalid("need exactly one weight per training point")
        if any(a < 0 for a in weights) or abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
            raise WeightSumInvalid("weights must be nonnegative and sum to 1")
        dims = {s.dim for s in training} | {test.dim}
        if len(dims) != 1:
            raise DimensionMismatch("training and test states must share one dimension")
        object.__setattr__(self, "training", training)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "test", test)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_vectors(cls, X, y, x_test, weights=None) -> "LabeledDataset":
        """Amplitude-encode raw classical vectors."""
        return cls(
            tuple(qstate.amplitude_encode(x) for x in X),
            tuple(y),
            qstate.amplitude_encode(x_test),
            None if weights is None else tuple(weights),
        )

    @property
    def M(self) -> int:
        return len(self.training)

    @property
    def data_qubits(self) -> int:
        return self.test.num_qubits

    @property
    def index_qubits(self) -> int:
        return math.ceil(math.log2(self.M)) if self.M > 1 else 0

    @property
    def is_pure(self) -> bool:
        return all(isinstance(s, StateVector) for s in self.training + (self.test,))

    def with_test(self, test) -> "LabeledDataset":
        return LabeledDataset(self.training, self.labels, test, self.weights)


def toy_dataset(theta: float) -> LabeledDataset:
    """Two complex training points and a test point on a great circle.

    x1 = (i|0> + |1>)/sqrt2 (label 0), x2 = (i|0> - |1>)/sqrt2 (label 1),
    test = cos(theta/2)|0> - i sin(theta/2)|1>, uniform weights.
    """
    r = 1 / math.sqrt(2)
    x1 = StateVector([1j * r, r], (("data", 1),))
    x2 = StateVector([1j * r, -r], (("data", 1),))
    xt = StateVector([math.cos(theta / 2), -1j * math.sin(theta / 2)], (("data", 1),))
    return LabeledDataset((x1, x2), (0, 1), xt, (0.5, 0.5))


def _logical_label(y: int, width: int) -> np.ndarray:
    """|y>^{(x) width} as a dense amplitude vector."""
    v = np.zeros(1 << width, dtype=complex)
    v[(1 << width) - 1 if y else 0] = 1.0
    return v


def _index_vector(j: int, m: int) -> np.ndarray:
    v = np.zeros(1 << m, dtype=complex)
    v[j] = 1.0
    return v


def htc_layout(data: LabeledDataset, spec: ClassifierSpec, with_index: bool = True):
    layout = [("ancilla", 1), ("data", data.data_qubits), ("label", spec.label_width)]
    if with_index:
        layout.append(("index", data.index_qubits))
    return tuple(layout)


def stc_layout(data: LabeledDataset, spec: ClassifierSpec, with_index: bool = True):
    layout = [("ancilla", 1)]
    for i in range(1, spec.copies + 1):
        layout += [(f"test_{i}", data.data_qubits), (f"train_{i}", data.data_qubits)]
    layout.append(("label", spec.label_width))
    if with_index:
        layout.append(("index", data.index_qubits))
    return tuple(layout)


def final_state_qubits(data: LabeledDataset, spec: ClassifierSpec) -> int:
    """Qubit count of the final state once the index register is traced out."""
    layout = htc_layout if spec.variant == "HTC" else stc_layout
    return sum(w for _, w in layout(data, spec, with_index=False))


def _require_variant(spec: ClassifierSpec, variant: str):
    if spec.variant != variant:
        raise ValueError(f"expected a {variant} spec, got {spec.variant}")


def _require_pure(data: LabeledDataset):
    if not data.is_pure:
        raise MixedStateUnsupported("the Hadamard-test classifier needs pure input states")


def _htc_branch_amplitudes(x: StateVector, xt: StateVector, y: int, spec: ClassifierSpec):
    theta0, _, phi = spec.angles
    anc_data = np.concatenate(
        [math.cos(theta0 / 2) * x.amplitudes, math.sin(theta0 / 2) * np.exp(1j * phi) * xt.amplitudes]
    )
    return np.kron(anc_data, _logical_label(y, spec.label_width))


def build_htc_state(data: LabeledDataset, spec: ClassifierSpec) -> StateVector:
    """Full HTC input state with generalized superposition angle and phase.

    sum_j sqrt(a_j) (cos(t0/2)|0>|x_j> + sin(t0/2) e^{i phi}|1>|x~>) |y_j>^lam |j>
    """
    _require_variant(spec, "HTC")
    _require_pure(data)
    m = data.index_qubits
    psi = 0
    for j, (x, y, a) in enumerate(zip(data.training, data.labels, data.weights)):
        branch = _htc_branch_amplitudes(x, data.test, y, spec)
        psi = psi + math.sqrt(a) * np.kron(branch, _index_vector(j, m))
    return StateVector(psi, htc_layout(data, spec))


def _stc_branch_density(rho_t: np.ndarray, rho_j: np.ndarray, y: int, spec: ClassifierSpec):
    block = np.kron(rho_t, rho_j)
    out = np.array([[1.0]], dtype=complex)
    for _ in range(spec.copies):
        out = np.kron(out, block)
    lab = _logical_label(y, spec.label_width)
    anc = np.array([[1, 0], [0, 0]], dtype=complex)
    return np.kron(np.kron(anc, out), np.outer(lab, lab.conj()))


def build_stc_state(data: LabeledDataset, spec: ClassifierSpec) -> DensityMatrix:
    """|0><0| (x) sum_j a_j (rho~ (x) rho_j)^{(x)k} (x) |y_j><y_j| (x) |j><j|, materialized."""
    _require_variant(spec, "STC")
    rho_t = qstate.to_density(data.test).entries
    m = data.index_qubits
    rho = 0
    for j, (s, y, a) in enumerate(zip(data.training, data.labels, data.weights)):
        branch = _stc_branch_density(rho_t, qstate.to_density(s).entries, y, spec)
        idx = _index_vector(j, m)
        rho = rho + a * np.kron(branch, np.outer(idx, idx))
    return DensityMatrix(rho, stc_layout(data, spec))


def _ancilla_qubit(state: State) -> int:
    try:
        (q,) = state.register_qubits("ancilla")
    except (KeyError, ValueError):
        raise LayoutMismatch("state has no single-qubit 'ancilla' register") from None
    return q


def apply_interference(state: State, theta1: float) -> State:
    """Apply R_y(theta1) to the ancilla."""
    return qstate.apply_single_qubit(state, ry(theta1), _ancilla_qubit(state))


def apply_hadamard(state: State) -> State:
    return qstate.apply_single_qubit(state, qstate.H, _ancilla_qubit(state))


def _copy_registers(state: State, k: int):
    pairs = []
    for i in range(1, k + 1):
        try:
            pairs.append((state.register_qubits(f"test_{i}"), state.register_qubits(f"train_{i}")))
        except KeyError:
            raise LayoutMismatch(f"state lacks test_{i}/train_{i} registers for {k} copies") from None
    return pairs


def apply_swap_test(state: State, k: int, angles: Optional[Sequence[float]] = None) -> State:
    """Swap test over ``k`` (test, train) copy pairs.

    Without ``angles`` this is H . prod_i cSWAP(t_i, d_i | a=1) . H.  With
    ``angles = (theta0, theta1, phi)`` the first Hadamard becomes the
    preparation rotation and the last one R_y(theta1).
    """
    a = _ancilla_qubit(state)
    pairs = _copy_registers(state, k)
    p1 = np.take(state.probabilities().reshape((2,) * state.num_qubits), 1, axis=a).sum()
    if p1 > qstate.NORM_TOL:
        raise InvalidState("swap test expects the ancilla in |0>")
    if angles is None:
        state = qstate.apply_single_qubit(state, qstate.H, a)
    else:
        state = qstate.apply_single_qubit(state, prep_rotation(angles[0], angles[2]), a)
    for t, d in pairs:
        state = qstate.apply_controlled_swap(state, a, t, d)
    if angles is None:
        return qstate.apply_single_qubit(state, qstate.H, a)
    return qstate.apply_single_qubit(state, ry(angles[1]), a)


def reduce_to_single_qubit(state: State) -> State:
    """cX(a|l): flip the ancilla when the (single) label qubit is 1."""
    a = _ancilla_qubit(state)
    try:
        label = state.register_qubits("label")
    except KeyError:
        raise LayoutMismatch("state has no 'label' register") from None
    if len(label) != 1:
        raise LabelWidthUnsupported("single-qubit reduction needs a one-qubit label register")
    return qstate.apply_cnot(state, control=label[0], target=a)


def cnot_matrix() -> np.ndarray:
    """cX(i|j) on two qubits ordered (i, j): target first, control second."""
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    return np.kron(qstate.I2, P0) + np.kron(qstate.X, P1)


@dataclass(frozen=True)
class OutcomeDistribution:
    """p(i, j) over ancilla outcome i and logical label value j.

    ``probs`` is ordered (p(0,0), p(0,1), p(1,0), p(1,1)).
    """

    probs: tuple[float, float, float, float]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size != 4 or not np.all(np.isfinite(p)):
            raise InvalidDistribution("an outcome distribution has exactly four finite entries")
        if p.min() < -LEAKAGE_TOL or abs(p.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidDistribution(f"not a probability distribution: {p.tolist()}")
        p = np.clip(p, 0.0, None)
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    def __getitem__(self, key) -> float:
        i, j = key
        return self.probs[2 * i + j]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)

    @property
    def parity_plus(self) -> float:
        """Probability of the product outcome (-1)^(i+j) = +1."""
        return self.probs[0] + self.probs[3]

    @staticmethod
    def mixture(weights: Sequence[float], dists: Sequence["OutcomeDistribution"]):
        total = np.zeros(4)
        for w, d in zip(weights, dists):
            total += w * d.as_array()
        return OutcomeDistribution(tuple(total))


def outcome_distribution(state: State, lam: int, reduced: bool = False) -> OutcomeDistribution:
    """Joint ancilla / logical-label statistics of a final state.

    With ``reduced=True`` the state is taken to be after the cX(a|l)
    reduction; each recorded pair (i', j) is mapped back to (i' xor j, j),
    which is what a two-qubit measurement before the reduction would give.
    """
    a = _ancilla_qubit(state)
    label = state.register_qubits("label")
    if len(label) != lam:
        raise LayoutMismatch(f"label register has {len(label)} qubits, expected {lam}")
    if reduced and lam != 1:
        raise LabelWidthUnsupported("reduced measurement requires lam = 1")
    n = state.num_qubits
    t = state.probabilities().reshape((2,) * n)
    keep = [a, *label]
    t = np.moveaxis(t, keep, range(len(keep)))
    table = t.reshape(2, 1 << lam, -1).sum(axis=2)
    leakage = table[:, 1:-1].sum() if lam > 1 else 0.0
    if leakage > LEAKAGE_TOL:
        raise NonLogicalLeakage(f"{leakage:.3e} probability on non-logical label patterns")
    p = np.array([[table[0, 0], table[0, -1]], [table[1, 0], table[1, -1]]])
    if reduced:
        p = np.array([[p[0, 0], p[1, 1]], [p[1, 0], p[0, 1]]])
    return OutcomeDistribution(tuple(p.reshape(-1)))


def classifier_observable(layout, lam: int) -> Observable:
    """Diagonal observable sigma_z^(a) (x) sum_i sigma_z^(label_i)."""
    n = sum(w for _, w in layout)
    a = qstate.register_qubits(layout, "ancilla")[0]
    label = qstate.register_qubits(layout, "label")
    if len(label) != lam:
        raise LayoutMismatch("label register width differs from lam")
    idx = np.arange(1 << n)
    sign_a = 1 - 2 * ((idx >> (n - 1 - a)) & 1)
    label_sum = sum(1 - 2 * ((idx >> (n - 1 - q)) & 1) for q in label)
    return Observable((sign_a * label_sum).astype(float))


def ancilla_z(layout) -> Observable:
    n = sum(w for _, w in layout)
    return qstate.z_observable(n, {qstate.register_qubits(layout, "ancilla")[0]: 1.0})


def ancilla_label_zz(layout) -> Observable:
    """sigma_z^(a) sigma_z^(l) for a one-qubit label register."""
    n = sum(w for _, w in layout)
    label = qstate.register_qubits(layout, "label")
    if len(label) != 1:
        raise LabelWidthUnsupported("two-qubit observable needs lam = 1")
    return qstate.z_product_observable(n, [qstate.register_qubits(layout, "ancilla")[0], label[0]])


# ---------------------------------------------------------------------------
# Branch route: one simulation per training point, no index register.
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Branch:
    weight: float
    label: int
    state: State = field(repr=False)


def initial_branches(data: LabeledDataset, spec: ClassifierSpec) -> list[Branch]:
    """Per-training-point input states (normalized, index register dropped)."""
    out = []
    if spec.variant == "HTC":
        _require_pure(data)
        layout = htc_layout(data, spec, with_index=False)
        for x, y, a in zip(data.training, data.labels, data.weights):
            out.append(Branch(a, y, StateVector._trusted(_htc_branch_amplitudes(x, data.test, y, spec), layout)))
        return out
    layout = stc_layout(data, spec, with_index=False)
    if data.is_pure:
        anc = np.array([1, 0], dtype=complex)
        for x, y, a in zip(data.training, data.labels, data.weights):
            block = np.kron(data.test.amplitudes, x.amplitudes)
            psi = anc
            for _ in range(spec.copies):
                psi = np.kron(psi, block)
            psi = np.kron(psi, _logical_label(y, spec.label_width))
            out.append(Branch(a, y, StateVector._trusted(psi, layout)))
        return out
    rho_t = qstate.to_density(data.test).entries
    for s, y, a in zip(data.training, data.labels, data.weights):
        rho = _stc_branch_density(rho_t, qstate.to_density(s).entries, y, spec)
        out.append(Branch(a, y, DensityMatrix._trusted(rho, layout)))
    return out


def _interfere(state: State, spec: ClassifierSpec) -> State:
    if spec.variant == "HTC":
        return apply_interference(state, spec.angles[1])
    return apply_swap_test(state, spec.copies, spec.angles)


def final_branches(data: LabeledDataset, spec: ClassifierSpec, reduce: bool = False) -> list[Branch]:
    out = []
    for b in initial_branches(data, spec):
        s = _interfere(b.state, spec)
        if reduce:
            s = reduce_to_single_qubit(s)
        out.append(Branch(b.weight, b.label, s))
    return out


def final_state(data: LabeledDataset, spec: ClassifierSpec, reduce: bool = False) -> DensityMatrix:
    """Final pre-measurement state with the index register traced out."""
    branches = final_branches(data, spec, reduce)
    rho = sum(b.weight * qstate.to_density(b.state).entries for b in branches)
    return DensityMatrix._trusted(rho, branches[0].state.layout)


def full_final_state(data: LabeledDataset, spec: ClassifierSpec, reduce: bool = False) -> State:
    """Oracle route: materialize the index register and run the whole circuit."""
    if spec.variant == "HTC":
        s = build_htc_state(data, spec)
    else:
        s = build_stc_state(data, spec)
    s = _interfere(s, spec)
    return reduce_to_single_qubit(s) if reduce else s


def simulate_distribution(
    data: LabeledDataset, spec: ClassifierSpec, reduce: bool = False
) -> OutcomeDistribution:
    """Outcome distribution, averaged over branches in fixed training order."""
    branches = final_branches(data, spec, reduce)
    dists = [outcome_distribution(b.state, spec.label_width, reduced=reduce) for b in branches]
    return OutcomeDistribution.mixture([b.weight for b in branches], dists)


def circuit_expectation(data: LabeledDataset, spec: ClassifierSpec) -> float:
    """<sigma_z^(a) (x) A_lam> measured on the simulated circuit."""
    branches = final_branches(data, spec)
    obs = classifier_observable(branches[0].state.layout, spec.label_width)
    return math.fsum(b.weight * qstate.expectation(b.state, obs) for b in branches)
