"""
Closed-form algebra of Bell-state labels.

A Bell state is labelled by two bits ``(x, z)``: ``x`` is the bit-flip
component and ``z`` the phase-flip component, so that the state equals
``(X^x Z^z ⊗ I)|φ+⟩`` up to a global phase. Global phases are dropped
everywhere; they never change which Bell state a pair is in.

With this representation every Pauli acts as an XOR on the label, and
entanglement swapping is the XOR of the three labels involved.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import NamedTuple

BitCode = tuple[int, int]


class BellLabel(Enum):
    """One of the four Bell states, valued by its ``(x, z)`` components."""

    PHI_PLUS = (0, 0)
    PSI_PLUS = (1, 0)
    PSI_MINUS = (1, 1)
    PHI_MINUS = (0, 1)

    @property
    def x(self) -> int:
        return self.value[0]

    @property
    def z(self) -> int:
        return self.value[1]

    @property
    def index(self) -> int:
        """Position of the label in ``BELL_LABELS``."""
        return _LABEL_INDEX[self]

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    @classmethod
    def from_xz(cls, x: int, z: int) -> BellLabel:
        return cls((x & 1, z & 1))

    @classmethod
    def from_symbol(cls, symbol: str) -> BellLabel:
        for label, sym in _SYMBOLS.items():
            if sym == symbol:
                return label
        raise ValueError(f"unknown Bell label symbol {symbol!r}")

    def __xor__(self, other: BellLabel | PauliOp) -> BellLabel:
        ox, oz = other.value if isinstance(other, BellLabel) else other.displacement
        return BellLabel.from_xz(self.x ^ ox, self.z ^ oz)

    def __str__(self) -> str:
        return self.symbol


BELL_LABELS: tuple[BellLabel, ...] = (
    BellLabel.PHI_PLUS,
    BellLabel.PSI_PLUS,
    BellLabel.PSI_MINUS,
    BellLabel.PHI_MINUS,
)
_LABEL_INDEX = {label: i for i, label in enumerate(BELL_LABELS)}
_SYMBOLS = {
    BellLabel.PHI_PLUS: "phi+",
    BellLabel.PSI_PLUS: "psi+",
    BellLabel.PSI_MINUS: "psi-",
    BellLabel.PHI_MINUS: "phi-",
}


class PauliOp(Enum):
    """Local operation sigma_0..sigma_3 (I, X, Y, Z)."""

    SIGMA0 = 0
    SIGMA1 = 1
    SIGMA2 = 2
    SIGMA3 = 3

    @property
    def displacement(self) -> tuple[int, int]:
        """The ``(x, z)`` shift this operation applies to a Bell label."""
        return _DISPLACEMENT[self]

    @classmethod
    def from_displacement(cls, x: int, z: int) -> PauliOp:
        return _FROM_DISPLACEMENT[(x & 1, z & 1)]


PAULI_OPS: tuple[PauliOp, ...] = tuple(PauliOp)
# X flips x, Z flips z, Y = iXZ flips both.
_DISPLACEMENT = {
    PauliOp.SIGMA0: (0, 0),
    PauliOp.SIGMA1: (1, 0),
    PauliOp.SIGMA2: (1, 1),
    PauliOp.SIGMA3: (0, 1),
}
_FROM_DISPLACEMENT = {v: k for k, v in _DISPLACEMENT.items()}

_BELL_CODE: dict[BellLabel, BitCode] = {
    BellLabel.PHI_PLUS: (0, 0),
    BellLabel.PSI_PLUS: (0, 1),
    BellLabel.PSI_MINUS: (1, 0),
    BellLabel.PHI_MINUS: (1, 1),
}
_CODE_BELL = {v: k for k, v in _BELL_CODE.items()}


def bell_to_code(label: BellLabel) -> BitCode:
    """Two-bit key code of a Bell state: phi+ 00, psi+ 01, psi- 10, phi- 11."""
    return _BELL_CODE[label]


def code_to_bell(code: BitCode) -> BellLabel:
    try:
        return _CODE_BELL[tuple(code)]
    except KeyError:
        raise ValueError(f"not a two-bit code: {code!r}") from None


def pauli_to_code(op: PauliOp) -> BitCode:
    """Two-bit key code of a Pauli: sigma_k maps to k written in binary."""
    return (op.value >> 1, op.value & 1)


def code_to_pauli(code: BitCode) -> PauliOp:
    b0, b1 = code
    if b0 not in (0, 1) or b1 not in (0, 1):
        raise ValueError(f"not a two-bit code: {code!r}")
    return PauliOp(2 * b0 + b1)


def apply_pauli_first(op: PauliOp, pair: BellLabel) -> BellLabel:
    return pair ^ op


def swap_residual(pair_a: BellLabel, pair_b: BellLabel, outcome: BellLabel) -> BellLabel:
    """
    Label of the unmeasured pair after a Bell measurement on one particle of
    ``pair_a`` and one of ``pair_b`` returns ``outcome``.

    Which particle of each pair is measured only changes a global sign.
    """
    return pair_a ^ pair_b ^ outcome


class SwapBranch(NamedTuple):
    outcome: BellLabel
    residual: BellLabel
    probability: Fraction


def swap_distribution(pair_a: BellLabel, pair_b: BellLabel) -> list[SwapBranch]:
    """All four measurement branches of a swap, each with probability 1/4."""
    quarter = Fraction(1, 4)
    return [SwapBranch(o, swap_residual(pair_a, pair_b, o), quarter) for o in BELL_LABELS]


def infer_imaginary(initial_a: BellLabel, initial_b: BellLabel, residual: BellLabel) -> BellLabel:
    """
    The outcome the measured pair would have shown with no local operation,
    given the residual pair's label and the publicly known initial pairs.
    """
    return initial_a ^ initial_b ^ residual


def infer_pauli(
    announced: BellLabel,
    residual: BellLabel,
    initial_a: BellLabel,
    initial_b: BellLabel,
) -> PauliOp:
    """
    Recover the local operation applied to the first particle of ``initial_a``.

    The Pauli group acts regularly on labels, so the displacement between the
    announced outcome and the imaginary one identifies the operation uniquely.
    """
    d = announced ^ infer_imaginary(initial_a, initial_b, residual)
    return PauliOp.from_displacement(d.x, d.z)
