"""
Dense statevector simulator for small registers (up to 8 qubits).

Qubit 0 is the most significant bit of the basis index, so the amplitude of
``|q0 q1 ... q_{n-1}⟩`` sits at index ``sum(q_k << (n - 1 - k))``.

This module is deliberately independent of the label arithmetic in
:mod:`swapqkd.bell`: it only knows the four Bell vectors and the Pauli
matrices, which is what makes it usable as an oracle for that module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from swapqkd.bell import BELL_LABELS, BellLabel, PauliOp

MAX_QUBITS = 8
NORM_TOL = 1e-12
IDENTIFY_TOL = 1e-9

_S = 1 / math.sqrt(2)

# Rows are the canonical Bell vectors in BELL_LABELS order.
BELL_BASIS = np.array(
    [
        [_S, 0, 0, _S],  # phi+
        [0, _S, _S, 0],  # psi+
        [0, _S, -_S, 0],  # psi-
        [_S, 0, 0, -_S],  # phi-
    ],
    dtype=complex,
)

PAULI_MATRICES = {
    PauliOp.SIGMA0: np.eye(2, dtype=complex),
    PauliOp.SIGMA1: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliOp.SIGMA2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliOp.SIGMA3: np.array([[1, 0], [0, -1]], dtype=complex),
}


class CapacityError(ValueError):
    """Raised when a register would exceed MAX_QUBITS."""


class NotABellStateError(ValueError):
    """Raised by identify_bell for a two-qubit state that is not a Bell state."""


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise CapacityError(f"num_qubits must be in 1..{MAX_QUBITS}, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.num_qubits:
            raise ValueError(f"expected {1 << self.num_qubits} amplitudes, got {amps.shape[0]}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.shape[0].bit_length() - 1
        if amps.shape[0] != 1 << n:
            raise ValueError("amplitude count must be a power of two")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def zero(cls, num_qubits: int = 1) -> StateVector:
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def equals_up_to_phase(self, other: StateVector, tol: float = IDENTIFY_TOL) -> bool:
        if self.num_qubits != other.num_qubits:
            return False
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= tol


@dataclass(frozen=True)
class MeasureResult:
    outcome: BellLabel
    probability: float
    post_state: StateVector


def make_bell_pair(label: BellLabel) -> StateVector:
    return StateVector(2, BELL_BASIS[label.index].copy())


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; ``a``'s qubits come first."""
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"tensor product would need {n} qubits (max {MAX_QUBITS})")
    return StateVector(n, np.kron(a.amplitudes, b.amplitudes))


def _check_qubits(state: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q} out of range for a {state.num_qubits}-qubit state")
    if len(set(qubits)) != len(qubits):
        raise IndexError(f"qubit indices must be distinct, got {qubits}")


def apply_single(state: StateVector, qubit: int, matrix: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to one qubit."""
    _check_qubits(state, qubit)
    t = np.tensordot(matrix, state.tensor_view(), axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    return StateVector(state.num_qubits, t.reshape(-1))


def apply_pauli(state: StateVector, qubit: int, op: PauliOp) -> StateVector:
    return apply_single(state, qubit, PAULI_MATRICES[op])


def _bell_components(state: StateVector, q1: int, q2: int) -> np.ndarray:
    """Shape (4, rest): amplitude of each Bell state on (q1, q2) times the rest."""
    _check_qubits(state, q1, q2)
    t = np.moveaxis(state.tensor_view(), (q1, q2), (0, 1)).reshape(4, -1)
    return BELL_BASIS.conj() @ t


def bell_probabilities(state: StateVector, q1: int, q2: int) -> np.ndarray:
    """Born-rule probabilities of each Bell outcome on (q1, q2), in BELL_LABELS order."""
    comps = _bell_components(state, q1, q2)
    return np.einsum("ij,ij->i", comps, comps.conj()).real


def project_bell(state: StateVector, q1: int, q2: int, outcome: BellLabel) -> tuple[float, StateVector | None]:
    """Project (q1, q2) onto ``outcome``; returns (probability, normalized post-state or None)."""
    comps = _bell_components(state, q1, q2)
    rest = comps[outcome.index]
    p = float(np.vdot(rest, rest).real)
    if p <= NORM_TOL:
        return p, None
    n = state.num_qubits
    # Rebuild |β⟩_(q1,q2) ⊗ rest with q1, q2 moved back in place.
    full = np.outer(BELL_BASIS[outcome.index], rest / math.sqrt(p))
    full = np.moveaxis(full.reshape((2,) * n), (0, 1), (q1, q2))
    return p, StateVector(n, full.reshape(-1))


def bell_measure(state: StateVector, q1: int, q2: int, rng: np.random.Generator) -> MeasureResult:
    """Sample a Bell measurement on (q1, q2); the pair is collapsed in place."""
    probs = bell_probabilities(state, q1, q2)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    k = int(rng.choice(4, p=probs))
    outcome = BELL_LABELS[k]
    p, post = project_bell(state, q1, q2, outcome)
    assert post is not None  # zero-probability outcomes cannot be drawn
    return MeasureResult(outcome, p, post)


def identify_bell(state: StateVector) -> BellLabel:
    """Return the Bell label of a two-qubit state, ignoring global phase."""
    if state.num_qubits != 2:
        raise NotABellStateError(f"expected a 2-qubit state, got {state.num_qubits}")
    overlaps = np.abs(BELL_BASIS.conj() @ state.amplitudes)
    k = int(np.argmax(overlaps))
    if abs(overlaps[k] - 1.0) > IDENTIFY_TOL:
        raise NotABellStateError("state is not a Bell state")
    return BELL_LABELS[k]


def reduced_pair(state: StateVector, q1: int, q2: int) -> StateVector:
    """
    Extract the state of (q1, q2) when it factors out of the register.

    Raises NotABellStateError-compatible ValueError if (q1, q2) is entangled
    with the remaining qubits.
    """
    _check_qubits(state, q1, q2)
    t = np.moveaxis(state.tensor_view(), (q1, q2), (0, 1)).reshape(4, -1)
    u, s, _ = np.linalg.svd(t, full_matrices=False)
    if s.shape[0] > 1 and s[1] > IDENTIFY_TOL:
        raise ValueError(f"qubits ({q1}, {q2}) are entangled with the rest of the register")
    pair = u[:, 0]
    return StateVector(2, pair / np.linalg.norm(pair))


def make_entangled_source(ancilla_overlap: float = 0.0) -> StateVector:
    """
    Three-qubit source ``(|00⟩|α⟩ + |11⟩|β⟩)/√2`` with ``⟨α|β⟩ = ancilla_overlap``.

    Qubit order is (Alice's particle, Bob's particle, eavesdropper's ancilla);
    ``α = |0⟩`` and ``β = cos θ|0⟩ + sin θ|1⟩``.
    """
    if not 0.0 <= ancilla_overlap <= 1.0:
        raise ValueError(f"ancilla_overlap must be in [0, 1], got {ancilla_overlap}")
    c = ancilla_overlap
    s = math.sqrt(max(0.0, 1.0 - c * c))
    amps = np.zeros(8, dtype=complex)
    amps[0b000] = _S
    amps[0b110] = _S * c
    amps[0b111] = _S * s
    return StateVector(3, amps)
