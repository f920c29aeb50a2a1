"""
Eavesdropper models.

Every model exposes ``play_round``, which runs the quantum part of one round
(Alice's Bell measurement on particles 1 and 3, Bob's on 2 and 4) under the
attack and returns what each party observed. The classical logic that turns
observations into key bits lives in :mod:`swapqkd.protocol`.

* ``NoAttack`` and ``PassiveGuess`` leave the quantum channel untouched; the
  honest round is sampled from the exact label distribution.
* ``EntangleSource`` replaces each EPR pair by a three-qubit state correlated
  with an ancilla Eve keeps, and simulates the six-qubit register.
* ``ManInTheMiddle`` gives Alice and Bob pairs that each share only with Eve;
  Eve measures her halves on both sides and relays announcements verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from swapqkd import statevector as sv
from swapqkd.bell import (
    BELL_LABELS,
    PAULI_OPS,
    BellLabel,
    PauliOp,
    apply_pauli_first,
    bell_to_code,
    infer_pauli,
    pauli_to_code,
    swap_residual,
)

KEY_BITS_PER_ROUND = 6
# Positions of the publicly announced code inside a round's six key bits.
ANNOUNCED_MASK = (False, False, False, False, True, True)


@dataclass(frozen=True)
class EveRecord:
    round_index: int
    guessed_bits: tuple[int, ...] | None
    known_bits_mask: tuple[bool, ...]
    eve_measurements: tuple[BellLabel, ...] = ()

    def to_dict(self) -> dict:
        return {
            "round": self.round_index,
            "guessed_bits": None if self.guessed_bits is None else "".join(map(str, self.guessed_bits)),
            "known_bits": sum(self.known_bits_mask),
            "eve_measurements": [m.symbol for m in self.eve_measurements],
        }


@dataclass(frozen=True)
class RoundPhysics:
    """What the legitimate parties (and Eve) measured in one round."""

    announced_13: BellLabel
    residual_24: BellLabel
    eve_measurements: tuple[BellLabel, ...] = ()


def round_bits(pauli: PauliOp, residual: BellLabel, announced: BellLabel) -> tuple[int, ...]:
    """Six key bits of one round: certain ‖ residual code ‖ announced code."""
    return pauli_to_code(pauli) + bell_to_code(residual) + bell_to_code(announced)


def sample_honest_round(
    pauli: PauliOp,
    initial_a: BellLabel,
    initial_b: BellLabel,
    rng: np.random.Generator,
    forced_outcome: BellLabel | None = None,
) -> RoundPhysics:
    """Exact honest round: every Bell outcome on (1, 3) has probability 1/4."""
    outcome = BELL_LABELS[int(rng.integers(4))] if forced_outcome is None else forced_outcome
    residual = swap_residual(apply_pauli_first(pauli, initial_a), initial_b, outcome)
    return RoundPhysics(outcome, residual)


@dataclass(frozen=True)
class NoAttack:
    name = "none"

    def play_round(self, pauli, initial_a, initial_b, rng) -> RoundPhysics:
        return sample_honest_round(pauli, initial_a, initial_b, rng)

    def eve_record(self, round_index, physics, alice_pauli) -> EveRecord | None:
        return None

    def check_match_probability(self) -> float:
        return 1.0


@dataclass(frozen=True)
class PassiveGuess:
    """Eve reads the public channel and guesses Alice's operation."""

    name = "passive"

    def play_round(self, pauli, initial_a, initial_b, rng) -> RoundPhysics:
        return sample_honest_round(pauli, initial_a, initial_b, rng)

    def eve_record(self, round_index, physics, alice_pauli) -> EveRecord | None:
        # Filled in after the session from the transcript; see passive_guess.
        return None

    def check_match_probability(self) -> float:
        return 1.0


def passive_guess(
    announcements: Iterable[tuple[int, BellLabel]],
    rng: np.random.Generator,
    initial_a: BellLabel = BellLabel.PHI_PLUS,
    initial_b: BellLabel = BellLabel.PHI_PLUS,
) -> list[EveRecord]:
    """
    Eve's best guess from public information only.

    ``announcements`` are ``(round_index, announced_13)`` pairs read off the
    classical channel. The announced code is known exactly; the Pauli is
    guessed uniformly and the residual follows from the guess.
    """
    records = []
    for round_index, announced in announcements:
        guess = PAULI_OPS[int(rng.integers(4))]
        residual = swap_residual(apply_pauli_first(guess, initial_a), initial_b, announced)
        records.append(
            EveRecord(
                round_index,
                guessed_bits=round_bits(guess, residual, announced),
                known_bits_mask=ANNOUNCED_MASK,
            )
        )
    return records


@lru_cache(maxsize=32)
def _entangled_register(overlap: float) -> sv.StateVector:
    src = sv.make_entangled_source(overlap)
    # Register order: particles 1, 2, 5 then 3, 4, 6.
    return sv.tensor(src, src)


# Qubit positions of particles 1..6 in the entangled-source register.
_ES_QUBIT = {1: 0, 2: 1, 5: 2, 3: 3, 4: 4, 6: 5}


@dataclass(frozen=True)
class EntangleSource:
    """
    Eve substitutes ``(|00⟩|α⟩ + |11⟩|β⟩)/√2`` for each ``|φ+⟩`` source.

    ``overlap`` is ``⟨α|β⟩``; 0 is the strongest attack, 1 is no attack.
    """

    overlap: float = 0.0
    name = "entangle"

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap must be in [0, 1], got {self.overlap}")

    def play_round(self, pauli, initial_a, initial_b, rng) -> RoundPhysics:
        q = _ES_QUBIT
        state = _entangled_register(float(self.overlap))
        state = sv.apply_pauli(state, q[1], pauli)
        alice = sv.bell_measure(state, q[1], q[3], rng)
        bob = sv.bell_measure(alice.post_state, q[2], q[4], rng)
        eve = sv.bell_measure(bob.post_state, q[5], q[6], rng)
        return RoundPhysics(alice.outcome, bob.outcome, (eve.outcome,))

    def eve_record(self, round_index, physics, alice_pauli) -> EveRecord:
        return EveRecord(round_index, None, ANNOUNCED_MASK, physics.eve_measurements)

    def check_match_probability(self) -> float:
        # Each pair keeps its phase with probability (1 + c)/2; the residual
        # matches when both or neither pair flipped.
        c = self.overlap
        return (1.0 + c * c) / 2.0


@lru_cache(maxsize=1)
def _phi_plus_register() -> sv.StateVector:
    phi = sv.make_bell_pair(BellLabel.PHI_PLUS)
    return sv.tensor(phi, phi)


@dataclass(frozen=True)
class MitmOutcome:
    alice_outcome: BellLabel
    eve_alice_side: BellLabel
    eve_bob_side: BellLabel
    bob_outcome: BellLabel


def mitm_round(pauli: PauliOp, rng: np.random.Generator) -> MitmOutcome:
    """
    One round with Eve holding the other half of every pair.

    Alice side: particles 1, 3 (Alice) and 2, 4 (Eve).
    Bob side: particles 1', 3' (Eve) and 2', 4' (Bob).
    Registers are ordered (1, 2, 3, 4).
    """
    base = _phi_plus_register()
    alice_side = sv.apply_pauli(base, 0, pauli)
    alice = sv.bell_measure(alice_side, 0, 2, rng)
    eve_a = sv.bell_measure(alice.post_state, 1, 3, rng)
    eve_b = sv.bell_measure(base, 0, 2, rng)
    bob = sv.bell_measure(eve_b.post_state, 1, 3, rng)
    return MitmOutcome(alice.outcome, eve_a.outcome, eve_b.outcome, bob.outcome)


@dataclass(frozen=True)
class ManInTheMiddle:
    """Eve shares ``|φ+⟩`` pairs separately with Alice and with Bob."""

    name = "mitm"

    def play_round(self, pauli, initial_a, initial_b, rng) -> RoundPhysics:
        out = mitm_round(pauli, rng)
        # Alice's announcement reaches Bob unchanged.
        return RoundPhysics(out.alice_outcome, out.bob_outcome, (out.eve_alice_side, out.eve_bob_side))

    def eve_record(self, round_index, physics, alice_pauli) -> EveRecord:
        eve_residual, _ = physics.eve_measurements
        # Eve plays Bob on Alice's side, so Bob's inference works for her.
        phi = BellLabel.PHI_PLUS
        guess = infer_pauli(physics.announced_13, eve_residual, phi, phi)
        bits = round_bits(guess, eve_residual, physics.announced_13)
        return EveRecord(round_index, bits, (True,) * KEY_BITS_PER_ROUND, physics.eve_measurements)

    def check_match_probability(self) -> float:
        return 0.25


AttackModel = NoAttack | PassiveGuess | EntangleSource | ManInTheMiddle

ATTACK_NAMES = ("none", "passive", "entangle", "mitm")


def make_attack(name: str, overlap: float = 0.0) -> AttackModel:
    if name == "none":
        return NoAttack()
    if name == "passive":
        return PassiveGuess()
    if name == "entangle":
        return EntangleSource(overlap)
    if name == "mitm":
        return ManInTheMiddle()
    raise ValueError(f"unknown attack {name!r}; expected one of {ATTACK_NAMES}")


def detection_curve(attack: AttackModel, checks: int) -> float:
    """Probability that ``checks`` independent check rounds reveal the attack."""
    if checks < 0:
        raise ValueError("checks must be non-negative")
    return 1.0 - attack.check_match_probability() ** checks


def block_detections(matches: Sequence[bool], k: int) -> tuple[int, int]:
    """
    Split a stream of per-round check outcomes into disjoint blocks of ``k``
    and count the blocks containing at least one mismatch.

    Returns ``(blocks, detected)``. ``k == 0`` yields ``(0, 0)``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return 0, 0
    n = len(matches) // k
    if n == 0:
        return 0, 0
    arr = np.asarray(matches[: n * k], dtype=bool).reshape(n, k)
    return n, int(np.count_nonzero(~arr.all(axis=1)))


@dataclass
class AdversaryStats:
    """Per-session counters; everything else is derived from these."""

    attack: str
    rounds: int = 0
    channel_matches: int = 0
    eve_guessed_rounds: int = 0
    eve_full_correct: int = 0
    eve_certain_correct: int = 0
    known_bits: int = 0
    cross_matches: int | None = None
    blocks: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def match_rate(self) -> float:
        return self.channel_matches / self.rounds if self.rounds else float("nan")

    @property
    def known_bit_fraction(self) -> float | None:
        if self.attack == "none" or not self.rounds:
            return None
        return self.known_bits / (KEY_BITS_PER_ROUND * self.rounds)

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "rounds": self.rounds,
            "channel_matches": self.channel_matches,
            "eve_guessed_rounds": self.eve_guessed_rounds,
            "eve_full_correct": self.eve_full_correct,
            "eve_certain_correct": self.eve_certain_correct,
            "known_bits": self.known_bits,
            "cross_matches": self.cross_matches,
            "blocks": {str(k): list(v) for k, v in sorted(self.blocks.items())},
        }
