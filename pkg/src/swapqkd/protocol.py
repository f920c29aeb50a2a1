"""
The Alice/Bob key-distribution session.

Per round Alice prepares two ``|φ+⟩`` pairs (1,2) and (3,4), keeps 1 and 3,
sends 2 and 4 to Bob, applies a Pauli to particle 1 and Bell-measures 1 and 3.
Bob Bell-measures 2 and 4, asks for Alice's outcome, and recovers her Pauli.
Each round yields six key bits in the order

    certain (Pauli code) ‖ residual-pair code ‖ announced code

After all rounds a random subset is sacrificed as check rounds: Bob reveals
his residual and Alice compares it with what she expects. Any mismatch aborts
the session and discards both keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from swapqkd.adversary import (
    AdversaryStats,
    AttackModel,
    EveRecord,
    NoAttack,
    PassiveGuess,
    RoundPhysics,
    block_detections,
    passive_guess,
    round_bits,
    sample_honest_round,
)
from swapqkd.bell import (
    PAULI_OPS,
    BellLabel,
    PauliOp,
    apply_pauli_first,
    code_to_pauli,
    infer_imaginary,
    infer_pauli,
    swap_residual,
)

MESSAGE_SCHEMA = "swapqkd.message/1"
SESSION_SCHEMA = "swapqkd.session/1"
PHI_PLUS = BellLabel.PHI_PLUS
DEFAULT_DETECTION_KS = (1, 2, 4, 8)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Classical channel


class MessageKind(str, Enum):
    MEASUREMENT_DONE = "MeasurementDone"
    RESULT_REQUEST = "ResultRequest"
    RESULT_ANNOUNCE = "ResultAnnounce"
    CHECK_REVEAL = "CheckReveal"
    CHECK_VERDICT = "CheckVerdict"
    ABORT = "Abort"


@dataclass(frozen=True)
class ClassicalMessage:
    """One public message. Payloads are Bell labels or booleans only."""

    kind: MessageKind
    sender: str
    round: int | None = None
    label: BellLabel | None = None
    match: bool | None = None
    reason: str | None = None

    def to_record(self, seq: int) -> dict:
        rec = {"schema": MESSAGE_SCHEMA, "seq": seq, "kind": self.kind.value, "sender": self.sender}
        if self.round is not None:
            rec["round"] = self.round
        if self.label is not None:
            rec["label"] = self.label.symbol
        if self.match is not None:
            rec["match"] = self.match
        if self.reason is not None:
            rec["reason"] = self.reason
        return rec


def dump_transcript(messages: Sequence[ClassicalMessage], **extra) -> str:
    """Serialize a message log as JSON lines, one message per line."""
    lines = []
    for seq, msg in enumerate(messages):
        rec = msg.to_record(seq)
        rec.update(extra)
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def load_transcript(text: str) -> list[ClassicalMessage]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("schema") != MESSAGE_SCHEMA:
            raise ValueError(f"unexpected schema {rec.get('schema')!r}")
        out.append(
            ClassicalMessage(
                MessageKind(rec["kind"]),
                rec["sender"],
                rec.get("round"),
                BellLabel.from_symbol(rec["label"]) if "label" in rec else None,
                rec.get("match"),
                rec.get("reason"),
            )
        )
    return out


def check_causality(messages: Sequence[ClassicalMessage]) -> None:
    """
    Raise AssertionError if the log breaks the round protocol: an announcement
    before its request, a request before the measurement notice, or anything
    after an Abort.
    """
    done, requested, announced = set(), set(), set()
    for i, msg in enumerate(messages):
        if i and messages[i - 1].kind is MessageKind.ABORT:
            raise AssertionError("message after Abort")
        r = msg.round
        if msg.kind is MessageKind.MEASUREMENT_DONE:
            done.add(r)
        elif msg.kind is MessageKind.RESULT_REQUEST:
            if r not in done:
                raise AssertionError(f"round {r}: request before MeasurementDone")
            requested.add(r)
        elif msg.kind is MessageKind.RESULT_ANNOUNCE:
            if r not in requested:
                raise AssertionError(f"round {r}: announcement before request")
            announced.add(r)
        elif msg.kind is MessageKind.CHECK_REVEAL:
            if r not in announced:
                raise AssertionError(f"round {r}: check reveal before announcement")


# ---------------------------------------------------------------------------
# Round logic


@dataclass(frozen=True)
class AliceRound:
    round_index: int
    initial_a: BellLabel
    initial_b: BellLabel
    pauli: PauliOp
    announced_13: BellLabel
    residual_24: BellLabel  # what Alice expects Bob to find
    imaginary_13: BellLabel
    key_bits: tuple[int, ...]


def alice_view(
    round_index: int,
    pauli: PauliOp,
    announced: BellLabel,
    initial_a: BellLabel = PHI_PLUS,
    initial_b: BellLabel = PHI_PLUS,
) -> AliceRound:
    """Steps 3 and 4 from Alice's side once her measurement outcome is known."""
    residual = swap_residual(apply_pauli_first(pauli, initial_a), initial_b, announced)
    imaginary = infer_imaginary(initial_a, initial_b, residual)
    return AliceRound(
        round_index, initial_a, initial_b, pauli, announced, residual, imaginary,
        round_bits(pauli, residual, announced),
    )


def alice_round(
    rng: np.random.Generator,
    pauli: PauliOp,
    round_index: int = 0,
    initial_a: BellLabel = PHI_PLUS,
    initial_b: BellLabel = PHI_PLUS,
    forced_outcome: BellLabel | None = None,
) -> tuple[AliceRound, BellLabel]:
    """
    Honest steps 1-5. Returns Alice's record and the Bell label of the pair
    (2, 4) that Bob now holds.
    """
    physics = sample_honest_round(pauli, initial_a, initial_b, rng, forced_outcome)
    return alice_view(round_index, pauli, physics.announced_13, initial_a, initial_b), physics.residual_24


def bob_round(
    residual_24: BellLabel,
    announced_13: BellLabel,
    initials: tuple[BellLabel, BellLabel] = (PHI_PLUS, PHI_PLUS),
) -> tuple[PauliOp, tuple[int, ...]]:
    """Steps 6-8: Bob's inferred Pauli and his six key bits."""
    initial_a, initial_b = initials
    pauli = infer_pauli(announced_13, residual_24, initial_a, initial_b)
    return pauli, round_bits(pauli, residual_24, announced_13)


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    initial_a: BellLabel
    initial_b: BellLabel
    pauli: PauliOp
    announced_13: BellLabel
    residual_24: BellLabel
    imaginary_13: BellLabel
    inferred_pauli: PauliOp
    alice_bits: tuple[int, ...]
    bob_bits: tuple[int, ...]
    checked: bool = False

    @property
    def key_bits(self) -> tuple[int, ...]:
        return self.bob_bits

    @property
    def alice_expected_residual(self) -> BellLabel:
        return swap_residual(apply_pauli_first(self.pauli, self.initial_a), self.initial_b, self.announced_13)

    @property
    def channel_match(self) -> bool:
        return self.residual_24 == self.alice_expected_residual

    def to_dict(self) -> dict:
        return {
            "round": self.round_index,
            "initial_a": self.initial_a.symbol,
            "initial_b": self.initial_b.symbol,
            "pauli": self.pauli.value,
            "announced_13": self.announced_13.symbol,
            "residual_24": self.residual_24.symbol,
            "imaginary_13": self.imaginary_13.symbol,
            "inferred_pauli": self.inferred_pauli.value,
            "alice_bits": "".join(map(str, self.alice_bits)),
            "bob_bits": "".join(map(str, self.bob_bits)),
            "checked": self.checked,
        }


# ---------------------------------------------------------------------------
# Session


@dataclass(frozen=True)
class SessionConfig:
    rounds: int
    check_fraction: float = 0.0
    seed: int = 0
    pauli_source: str | Sequence[int] = "uniform"
    attack: AttackModel = field(default_factory=NoAttack)
    detection_ks: tuple[int, ...] = DEFAULT_DETECTION_KS

    def __post_init__(self):
        if not isinstance(self.rounds, (int, np.integer)) or self.rounds < 1:
            raise ConfigError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not 0.0 <= self.check_fraction < 1.0:
            raise ConfigError(f"check_fraction must be in [0, 1), got {self.check_fraction!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if isinstance(self.pauli_source, str):
            if self.pauli_source != "uniform":
                raise ConfigError(f"unknown pauli_source {self.pauli_source!r}")
        else:
            bits = tuple(int(b) for b in self.pauli_source)
            if len(bits) != 2 * self.rounds:
                raise ConfigError(f"payload must hold 2*rounds = {2 * self.rounds} bits, got {len(bits)}")
            if any(b not in (0, 1) for b in bits):
                raise ConfigError("payload must contain only 0 and 1")
            object.__setattr__(self, "pauli_source", bits)
        if any(k < 0 for k in self.detection_ks):
            raise ConfigError("detection_ks must be non-negative")


@dataclass(frozen=True)
class DetectionReport:
    checked_rounds: int
    mismatches: int
    aborted: bool


@dataclass
class SessionResult:
    config: SessionConfig
    alice_key: tuple[int, ...]
    bob_key: tuple[int, ...]
    detection: DetectionReport
    per_round: list[RoundRecord]
    adversary_stats: AdversaryStats
    messages: list[ClassicalMessage]
    eve_records: list[EveRecord] = field(default_factory=list)

    @property
    def certain_bits(self) -> tuple[int, ...]:
        """Bob's certain-key bits from delivered rounds."""
        return tuple(b for i, b in enumerate(self.bob_key) if i % 6 < 2)

    def to_dict(self) -> dict:
        return {
            "schema": SESSION_SCHEMA,
            "seed": self.config.seed,
            "rounds": self.config.rounds,
            "alice_key": "".join(map(str, self.alice_key)),
            "bob_key": "".join(map(str, self.bob_key)),
            "checked_rounds": self.detection.checked_rounds,
            "mismatches": self.detection.mismatches,
            "aborted": self.detection.aborted,
            "adversary_stats": self.adversary_stats.to_dict(),
            "per_round": [r.to_dict() for r in self.per_round],
            "eve_records": [e.to_dict() for e in self.eve_records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _pauli_stream(config: SessionConfig, rng: np.random.Generator) -> Iterable[PauliOp]:
    if config.pauli_source == "uniform":
        for _ in range(config.rounds):
            yield PAULI_OPS[int(rng.integers(4))]
    else:
        bits = config.pauli_source
        for i in range(config.rounds):
            yield code_to_pauli((bits[2 * i], bits[2 * i + 1]))


def sift_and_check(
    records: Sequence[RoundRecord],
    check_fraction: float,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], tuple[int, ...], DetectionReport, list[RoundRecord], list[ClassicalMessage]]:
    """
    Step 9. Each round is checked independently with probability
    ``check_fraction``; Bob reveals the residual of checked rounds and Alice
    compares it with her expectation.

    Returns (alice_key, bob_key, report, records with ``checked`` set, messages).
    Keys are empty when the session aborts.
    """
    if not records:
        raise ValueError("no rounds to check")
    flags = rng.random(len(records)) < check_fraction
    marked = [replace(r, checked=bool(f)) for r, f in zip(records, flags)]
    messages: list[ClassicalMessage] = []
    mismatches = 0
    for r in marked:
        if r.checked:
            messages.append(ClassicalMessage(MessageKind.CHECK_REVEAL, "bob", r.round_index, label=r.residual_24))
    for r in marked:
        if r.checked:
            ok = r.channel_match
            mismatches += not ok
            messages.append(ClassicalMessage(MessageKind.CHECK_VERDICT, "alice", r.round_index, match=ok))
    checked = int(flags.sum())
    aborted = mismatches > 0
    if aborted:
        messages.append(ClassicalMessage(MessageKind.ABORT, "alice", reason=f"{mismatches} check mismatches"))
        alice_key: tuple[int, ...] = ()
        bob_key: tuple[int, ...] = ()
    else:
        alice_key = tuple(b for r in marked if not r.checked for b in r.alice_bits)
        bob_key = tuple(b for r in marked if not r.checked for b in r.bob_bits)
    return alice_key, bob_key, DetectionReport(checked, mismatches, aborted), marked, messages


def run_session(config: SessionConfig) -> SessionResult:
    """Run ``config.rounds`` rounds plus the check step; deterministic in ``config.seed``."""
    ss = np.random.SeedSequence(config.seed)
    quantum_ss, payload_ss, check_ss, eve_ss = ss.spawn(4)
    quantum_rng = np.random.default_rng(quantum_ss)
    payload_rng = np.random.default_rng(payload_ss)
    attack = config.attack
    a = b = PHI_PLUS

    records: list[RoundRecord] = []
    messages: list[ClassicalMessage] = []
    eve_records: list[EveRecord] = []
    stats = AdversaryStats(attack.name)
    physics_log: list[RoundPhysics] = []

    for i, pauli in enumerate(_pauli_stream(config, payload_rng)):
        physics = attack.play_round(pauli, a, b, quantum_rng)
        physics_log.append(physics)
        alice = alice_view(i, pauli, physics.announced_13, a, b)
        messages.append(ClassicalMessage(MessageKind.MEASUREMENT_DONE, "alice", i))
        messages.append(ClassicalMessage(MessageKind.RESULT_REQUEST, "bob", i))
        messages.append(ClassicalMessage(MessageKind.RESULT_ANNOUNCE, "alice", i, label=physics.announced_13))
        inferred, bob_bits = bob_round(physics.residual_24, physics.announced_13, (a, b))
        records.append(
            RoundRecord(
                i, a, b, pauli, physics.announced_13, physics.residual_24,
                infer_imaginary(a, b, physics.residual_24), inferred, alice.key_bits, bob_bits,
            )
        )
        eve = attack.eve_record(i, physics, pauli)
        if eve is not None:
            eve_records.append(eve)

    if isinstance(attack, PassiveGuess):
        public = [(m.round, m.label) for m in messages if m.kind is MessageKind.RESULT_ANNOUNCE]
        eve_records = passive_guess(public, np.random.default_rng(eve_ss), a, b)

    alice_key, bob_key, report, records, check_msgs = sift_and_check(
        records, config.check_fraction, np.random.default_rng(check_ss)
    )
    messages.extend(check_msgs)

    matches = [r.channel_match for r in records]
    stats.rounds = len(records)
    stats.channel_matches = sum(matches)
    for k in config.detection_ks:
        stats.blocks[k] = block_detections(matches, k)
    for eve in eve_records:
        rec = records[eve.round_index]
        stats.known_bits += sum(eve.known_bits_mask)
        if eve.guessed_bits is not None:
            stats.eve_guessed_rounds += 1
            stats.eve_full_correct += eve.guessed_bits == rec.alice_bits
            stats.eve_certain_correct += eve.guessed_bits[:2] == rec.alice_bits[:2]
    if attack.name == "mitm":
        stats.cross_matches = sum(p.announced_13 == p.eve_measurements[1] for p in physics_log)

    return SessionResult(config, alice_key, bob_key, report, records, stats, messages, eve_records)
