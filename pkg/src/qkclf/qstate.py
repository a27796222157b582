"""Dense state algebra: pure states, density matrices and observables.

Basis convention: registers are laid out most-significant-first in the order
of ``layout``, and qubits inside a register are big-endian.  Qubit 0 is the
most significant bit of the full basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidState, MixedKind, NonHermitian, ZeroVector

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGEN_FLOOR = -1e-10
IMAG_TOL = 1e-10
# Full eigen-decomposition is skipped above this dimension during validation.
_EIGEN_CHECK_MAX_DIM = 512

Layout = tuple[tuple[str, int], ...]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def _normalize_layout(layout, num_qubits: int) -> Layout:
    if layout is None:
        return (("q", num_qubits),)
    out = tuple((str(name), int(width)) for name, width in layout)
    names = [name for name, _ in out]
    if len(set(names)) != len(names):
        raise InvalidState(f"duplicate register names in layout {names}")
    if any(width < 0 for _, width in out):
        raise InvalidState("register widths must be nonnegative")
    if sum(width for _, width in out) != num_qubits:
        raise DimensionMismatch(
            f"layout {out} describes {sum(w for _, w in out)} qubits, state has {num_qubits}"
        )
    return out


def _qubit_count(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


class _LayoutMixin:
    layout: Layout

    @property
    def num_qubits(self) -> int:
        return sum(width for _, width in self.layout)

    @property
    def register_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.layout)

    def register_qubits(self, name: str) -> tuple[int, ...]:
        """Global qubit indices occupied by register ``name``."""
        return register_qubits(self.layout, name)


def register_qubits(layout: Layout, name: str) -> tuple[int, ...]:
    offset = 0
    for reg, width in layout:
        if reg == name:
            return tuple(range(offset, offset + width))
        offset += width
    raise KeyError(f"register {name!r} not in layout {layout}")


@dataclass(frozen=True, eq=False)
class StateVector(_LayoutMixin):
    """Normalized pure state of ``2**n`` complex amplitudes."""

    amplitudes: np.ndarray
    layout: Layout = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = _qubit_count(amps.size)
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "layout", _normalize_layout(self.layout, n))
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"state norm^2 is {norm!r}, expected 1")

    @classmethod
    def _trusted(cls, amplitudes: np.ndarray, layout: Layout) -> "StateVector":
        obj = object.__new__(cls)
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        amplitudes.setflags(write=False)
        object.__setattr__(obj, "amplitudes", amplitudes)
        object.__setattr__(obj, "layout", tuple(layout))
        return obj

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def with_layout(self, layout) -> "StateVector":
        return StateVector._trusted(self.amplitudes, _normalize_layout(layout, self.num_qubits))


@dataclass(frozen=True, eq=False)
class DensityMatrix(_LayoutMixin):
    """Hermitian, unit-trace, positive semidefinite operator."""

    entries: np.ndarray
    layout: Layout = None

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got shape {rho.shape}")
        n = _qubit_count(rho.shape[0])
        object.__setattr__(self, "entries", _frozen(rho))
        object.__setattr__(self, "layout", _normalize_layout(self.layout, n))
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NonHermitian("density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1.0) > NORM_TOL:
            raise InvalidState(f"density matrix trace is {trace!r}, expected 1")
        if rho.shape[0] <= _EIGEN_CHECK_MAX_DIM:
            if np.linalg.eigvalsh(rho).min() < EIGEN_FLOOR:
                raise InvalidState("density matrix has a negative eigenvalue")

    @classmethod
    def _trusted(cls, entries: np.ndarray, layout: Layout) -> "DensityMatrix":
        obj = object.__new__(cls)
        entries = np.asarray(entries, dtype=complex)
        entries.setflags(write=False)
        object.__setattr__(obj, "entries", entries)
        object.__setattr__(obj, "layout", tuple(layout))
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def probabilities(self) -> np.ndarray:
        return np.real(np.diagonal(self.entries)).copy()

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def with_layout(self, layout) -> "DensityMatrix":
        return DensityMatrix._trusted(self.entries, _normalize_layout(layout, self.num_qubits))


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable.

    ``entries`` is either a 1-D real diagonal (computational-basis observable)
    or a dense 2-D Hermitian matrix.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim == 1:
            if np.iscomplexobj(arr) and np.max(np.abs(arr.imag), initial=0.0) > HERMITIAN_TOL:
                raise NonHermitian("diagonal observable has complex entries")
            arr = np.real(arr).astype(float)
        elif arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
            arr = arr.astype(complex)
            if np.max(np.abs(arr - arr.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise NonHermitian("observable is not Hermitian")
        else:
            raise DimensionMismatch(f"observable must be 1-D or square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def is_diagonal(self) -> bool:
        return self.entries.ndim == 1

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def matrix(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.entries).astype(complex)
        return np.array(self.entries)


def pauli_string(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XIZ"`` (first letter = qubit 0)."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label.upper():
        try:
            out = np.kron(out, PAULI[ch])
        except KeyError:
            raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
    return out


def z_observable(num_qubits: int, weights: dict[int, float]) -> Observable:
    """Diagonal observable ``sum_q w_q Z_q`` on ``num_qubits`` qubits."""
    idx = np.arange(1 << num_qubits)
    diag = np.zeros(idx.size)
    for q, w in weights.items():
        bit = (idx >> (num_qubits - 1 - q)) & 1
        diag += w * (1 - 2 * bit)
    return Observable(diag)


def z_product_observable(num_qubits: int, qubits: Iterable[int]) -> Observable:
    """Diagonal observable ``prod_q Z_q``."""
    idx = np.arange(1 << num_qubits)
    parity = np.zeros(idx.size, dtype=int)
    for q in qubits:
        parity ^= (idx >> (num_qubits - 1 - q)) & 1
    return Observable((1 - 2 * parity).astype(float))


def amplitude_encode(x: Sequence[complex], name: str = "data") -> StateVector:
    """Encode a classical vector as normalized amplitudes.

    Inputs whose length is not a power of two are zero-padded.
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size < 1:
        raise ZeroVector("cannot encode an empty vector")
    norm = np.linalg.norm(x)
    if not norm >= 1e-300:
        raise ZeroVector("cannot amplitude-encode a zero vector")
    n = math.ceil(math.log2(x.size))
    amps = np.zeros(1 << n, dtype=complex)
    # Dividing twice keeps tiny and huge inputs normalized to double precision.
    amps[: x.size] = x / norm
    amps /= np.linalg.norm(amps)
    return StateVector(amps, ((name, n),))


def encode_dataset(X: Sequence[Sequence[complex]]) -> StateVector:
    """Encode ``M`` vectors of length ``N`` as ``sum_ij x_ij |i>|j>`` (normalized)."""
    rows = [np.asarray(x, dtype=complex).reshape(-1) for x in X]
    if not rows:
        raise ZeroVector("dataset is empty")
    N = rows[0].size
    if any(r.size != N for r in rows):
        raise DimensionMismatch("all data vectors must have the same length")
    M = len(rows)
    n = math.ceil(math.log2(N)) if N > 1 else 0
    m = math.ceil(math.log2(M)) if M > 1 else 0
    table = np.zeros((1 << n, 1 << m), dtype=complex)
    table[:N, :M] = np.stack(rows, axis=1)
    norm = np.linalg.norm(table)
    if not norm >= 1e-300:
        raise ZeroVector("cannot amplitude-encode an all-zero dataset")
    table /= norm
    table /= np.linalg.norm(table)
    return StateVector(table.reshape(-1), (("data", n), ("index", m)))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in the first argument."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot take inner product of dims {a.dim} and {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def to_density(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    psi = state.amplitudes
    return DensityMatrix._trusted(np.outer(psi, psi.conj()), state.layout)


def expectation(state: State, obs: Observable) -> float:
    """<psi|M|psi> or Tr(rho M) as a real number."""
    if state.dim != obs.dim:
        raise DimensionMismatch(f"state dim {state.dim} does not match observable dim {obs.dim}")
    if obs.is_diagonal:
        return float(np.dot(state.probabilities(), obs.entries))
    if isinstance(state, StateVector):
        psi = state.amplitudes
        value = np.vdot(psi, obs.entries @ psi)
    else:
        value = np.einsum("ij,ji->", state.entries, obs.entries)
    if abs(value.imag) > IMAG_TOL:
        raise NonHermitian(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def tensor(a: State, b: State) -> State:
    """Kronecker product with concatenated register layouts."""
    if type(a) is not type(b):
        raise MixedKind("tensor requires both pure or both mixed states")
    names_a, names_b = a.register_names, b.register_names
    layout = a.layout + b.layout
    if set(names_a) & set(names_b):
        # Clashing register names get positional suffixes.
        layout = tuple((f"{name}_{i}", w) for i, (name, w) in enumerate(layout))
    if isinstance(a, StateVector):
        return StateVector._trusted(np.kron(a.amplitudes, b.amplitudes), layout)
    return DensityMatrix._trusted(np.kron(a.entries, b.entries), layout)


def tensor_all(states: Sequence[State]) -> State:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def basis_state(bits: str, layout=None) -> StateVector:
    """Computational basis state from a bitstring like ``"010"``."""
    n = len(bits)
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2) if bits else 0] = 1.0
    return StateVector(amps, layout if layout is not None else (("q", n),))


# ---------------------------------------------------------------------------
# Gate application on either kind of state.  Gates act on global qubit
# indices; the state is reshaped into one axis per qubit (two for mixed).
# ---------------------------------------------------------------------------


def _as_tensor(state: State) -> tuple[np.ndarray, int]:
    n = state.num_qubits
    if isinstance(state, StateVector):
        return state.amplitudes.reshape((2,) * n), n
    return state.entries.reshape((2,) * (2 * n)), n


def _rebuild(state: State, t: np.ndarray) -> State:
    if isinstance(state, StateVector):
        return StateVector._trusted(t.reshape(-1), state.layout)
    return DensityMatrix._trusted(t.reshape(state.dim, state.dim), state.layout)


def _apply_matrix_axis(t: np.ndarray, U: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(U, t, axes=([1], [axis])), 0, axis)


def apply_single_qubit(state: State, U: np.ndarray, qubit: int) -> State:
    """Apply a 2x2 unitary to one qubit (``U rho U^dagger`` for mixed states)."""
    t, n = _as_tensor(state)
    if not 0 <= qubit < n:
        raise DimensionMismatch(f"qubit {qubit} out of range for {n} qubits")
    t = _apply_matrix_axis(t, U, qubit)
    if isinstance(state, DensityMatrix):
        t = _apply_matrix_axis(t, U.conj(), n + qubit)
    return _rebuild(state, t)


def _controlled_permute(t: np.ndarray, offset: int, control: int, permute) -> np.ndarray:
    out = np.array(t)
    idx = [slice(None)] * t.ndim
    idx[offset + control] = 1
    idx = tuple(idx)
    out[idx] = permute(t[idx])
    return out


def _adjust(axis: int, removed: int) -> int:
    return axis - 1 if axis > removed else axis


def apply_cnot(state: State, control: int, target: int) -> State:
    """Flip ``target`` when ``control`` is 1."""
    if control == target:
        raise DimensionMismatch("control and target must differ")
    t, n = _as_tensor(state)
    offsets = (0,) if isinstance(state, StateVector) else (0, n)
    for off in offsets:
        ax = _adjust(off + target, off + control)
        t = _controlled_permute(t, off, control, lambda sub, ax=ax: np.flip(sub, axis=ax))
    return _rebuild(state, t)


def apply_controlled_swap(
    state: State, control: int, qubits_a: Sequence[int], qubits_b: Sequence[int]
) -> State:
    """Exchange two equally sized qubit groups when ``control`` is 1."""
    if len(qubits_a) != len(qubits_b):
        raise DimensionMismatch("swapped registers must have equal width")
    if control in qubits_a or control in qubits_b or set(qubits_a) & set(qubits_b):
        raise DimensionMismatch("controlled swap registers overlap")
    t, n = _as_tensor(state)
    offsets = (0,) if isinstance(state, StateVector) else (0, n)
    for off in offsets:
        removed = off + control
        perm = list(range(t.ndim - 1))
        for qa, qb in zip(qubits_a, qubits_b):
            a, b = _adjust(off + qa, removed), _adjust(off + qb, removed)
            perm[a], perm[b] = perm[b], perm[a]
        t = _controlled_permute(t, off, control, lambda sub, perm=perm: sub.transpose(perm))
    return _rebuild(state, t)


def apply_pauli_string(state: State, label: str) -> State:
    """Conjugate by (or apply) a Pauli string; identity letters are skipped."""
    if len(label) != state.num_qubits:
        raise DimensionMismatch(
            f"Pauli string {label!r} has {len(label)} letters, state has {state.num_qubits} qubits"
        )
    for q, ch in enumerate(label.upper()):
        if ch != "I":
            state = apply_single_qubit(state, PAULI[ch], q)
    return state


def partial_trace(rho: State, keep: Sequence[str]) -> DensityMatrix:
    """Reduce onto the registers named in ``keep`` (layout order is preserved)."""
    rho = to_density(rho)
    n = rho.num_qubits
    kept_qubits: list[int] = []
    layout = []
    for name, width in rho.layout:
        if name in keep:
            kept_qubits.extend(rho.register_qubits(name))
            layout.append((name, width))
    missing = set(keep) - set(rho.register_names)
    if missing:
        raise KeyError(f"registers {sorted(missing)} not in layout")
    traced = [q for q in range(n) if q not in kept_qubits]
    t = rho.entries.reshape((2,) * (2 * n))
    # Move traced qubits to the end of both row and column groups.
    order = kept_qubits + traced + [n + q for q in kept_qubits] + [n + q for q in traced]
    t = t.transpose(order)
    dk, dt = 1 << len(kept_qubits), 1 << len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return DensityMatrix._trusted(np.einsum("itjt->ij", t), tuple(layout))
