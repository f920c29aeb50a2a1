"""
Exhaustive cross-checks of the label algebra against the statevector simulator.

Each check returns ``(passed, detail)``; ``run_all`` collects them in order.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable

import numpy as np

from swapqkd import statevector as sv
from swapqkd.bell import (
    BELL_LABELS,
    PAULI_OPS,
    BellLabel,
    PauliOp,
    apply_pauli_first,
    bell_to_code,
    code_to_bell,
    code_to_pauli,
    infer_imaginary,
    infer_pauli,
    pauli_to_code,
    swap_distribution,
    swap_residual,
)

PHI_P, PSI_P, PSI_M, PHI_M = (
    BellLabel.PHI_PLUS,
    BellLabel.PSI_PLUS,
    BellLabel.PSI_MINUS,
    BellLabel.PHI_MINUS,
)

# outcome on the measured pair -> state left on the other pair
SWAP_TABLE_PHI_PSI_MINUS = {PHI_P: PSI_M, PHI_M: PSI_P, PSI_P: PHI_M, PSI_M: PHI_P}
SWAP_TABLE_PSI_PHI = {PHI_P: PSI_P, PHI_M: PSI_M, PSI_P: PHI_P, PSI_M: PHI_M}
SWAP_TABLE_PHI_PHI = {L: L for L in BELL_LABELS}

Check = Callable[[], tuple[bool, str]]


def oracle_swap(pair_a: BellLabel, pair_b: BellLabel, measured=(0, 2)) -> dict[BellLabel, tuple[float, BellLabel]]:
    """Outcome -> (probability, residual label) from the dense simulator."""
    state = sv.tensor(sv.make_bell_pair(pair_a), sv.make_bell_pair(pair_b))
    rest = tuple(q for q in range(4) if q not in measured)
    out = {}
    for o in BELL_LABELS:
        p, post = sv.project_bell(state, *measured, o)
        out[o] = (p, sv.identify_bell(sv.reduced_pair(post, *rest)))
    return out


def check_encodings() -> tuple[bool, str]:
    bell = {PHI_P: (0, 0), PSI_P: (0, 1), PSI_M: (1, 0), PHI_M: (1, 1)}
    pauli = {PauliOp.SIGMA0: (0, 0), PauliOp.SIGMA1: (0, 1), PauliOp.SIGMA2: (1, 0), PauliOp.SIGMA3: (1, 1)}
    bad = [L for L, c in bell.items() if bell_to_code(L) != c or code_to_bell(c) != L]
    bad += [P for P, c in pauli.items() if pauli_to_code(P) != c or code_to_pauli(c) != P]
    return not bad, f"mismatched: {bad}" if bad else "8 codes"


def check_pauli_action() -> tuple[bool, str]:
    failures = []
    for op, label in itertools.product(PAULI_OPS, BELL_LABELS):
        state = sv.apply_pauli(sv.make_bell_pair(label), 0, op)
        if sv.identify_bell(state) != apply_pauli_first(op, label):
            failures.append((op, label))
        if apply_pauli_first(op, apply_pauli_first(op, label)) != label:
            failures.append((op, label, "involution"))
    for label in BELL_LABELS:
        if {apply_pauli_first(op, label) for op in PAULI_OPS} != set(BELL_LABELS):
            failures.append((label, "regular"))
    return not failures, f"failures: {failures}" if failures else "16 actions, regular, involutive"


def _check_table(pair_a, pair_b, measured, table) -> tuple[bool, str]:
    oracle = oracle_swap(pair_a, pair_b, measured)
    bad = []
    for o, residual in table.items():
        p, r = oracle[o]
        if r != residual or swap_residual(pair_a, pair_b, o) != residual or abs(p - 0.25) > 1e-12:
            bad.append((o.symbol, residual.symbol, r.symbol, p))
    return not bad, f"mismatched: {bad}" if bad else "4 branches"


def check_swap_phi_psi_minus() -> tuple[bool, str]:
    """|φ+⟩_12 ⊗ |ψ-⟩_34 measured on particles 2 and 3."""
    return _check_table(PHI_P, PSI_M, (1, 2), SWAP_TABLE_PHI_PSI_MINUS)


def check_swap_psi_phi() -> tuple[bool, str]:
    """|ψ+⟩_12 ⊗ |φ+⟩_34 measured on particles 1 and 3."""
    return _check_table(PSI_P, PHI_P, (0, 2), SWAP_TABLE_PSI_PHI)


def check_swap_phi_phi() -> tuple[bool, str]:
    return _check_table(PHI_P, PHI_P, (0, 2), SWAP_TABLE_PHI_PHI)


def check_swap_oracle_all() -> tuple[bool, str]:
    bad = []
    for a, b in itertools.product(BELL_LABELS, repeat=2):
        oracle = oracle_swap(a, b)
        dist = swap_distribution(a, b)
        if sum(br.probability for br in dist) != 1 or len({br.outcome for br in dist}) != 4:
            bad.append((a, b, "distribution"))
        for br in dist:
            p, r = oracle[br.outcome]
            if br.probability != Fraction(1, 4) or abs(p - 0.25) > 1e-12 or r != br.residual:
                bad.append((a.symbol, b.symbol, br.outcome.symbol))
    return not bad, f"mismatched: {bad}" if bad else "16 pairs x 4 outcomes"


def check_xor_law() -> tuple[bool, str]:
    bad = [
        (a, b, o)
        for a, b, o in itertools.product(BELL_LABELS, repeat=3)
        if swap_residual(a, b, o).value != (a.x ^ b.x ^ o.x, a.z ^ b.z ^ o.z)
    ]
    return not bad, f"mismatched: {bad}" if bad else "64 triples"


def check_inference_roundtrip() -> tuple[bool, str]:
    bad = []
    for a, b, op, o in itertools.product(BELL_LABELS, BELL_LABELS, PAULI_OPS, BELL_LABELS):
        residual = swap_residual(apply_pauli_first(op, a), b, o)
        if infer_pauli(o, residual, a, b) != op:
            bad.append((a, b, op, o))
        if infer_imaginary(a, b, swap_residual(a, b, o)) != o:
            bad.append((a, b, o, "imaginary"))
    return not bad, f"mismatched: {bad[:4]}" if bad else "256 cases"


def check_worked_example() -> tuple[bool, str]:
    # sigma_1 on particle 1, Alice finds psi- on (1,3).
    pair_a = apply_pauli_first(PauliOp.SIGMA1, PHI_P)
    residual = swap_residual(pair_a, PHI_P, PSI_M)
    imaginary = infer_imaginary(PHI_P, PHI_P, residual)
    op = infer_pauli(PSI_M, residual, PHI_P, PHI_P)
    got = (pair_a, residual, imaginary, pauli_to_code(op), bell_to_code(imaginary), bell_to_code(PSI_M))
    want = (PSI_P, PHI_M, PHI_M, (0, 1), (1, 1), (1, 0))
    bits = "".join(map(str, got[3] + got[4] + got[5]))
    return got == want, f"certain|random|random = {bits[:2]}|{bits[2:4]}|{bits[4:]}"


def check_oracle_normalization() -> tuple[bool, str]:
    rng = np.random.default_rng(0)
    worst = 0.0
    for a, b in itertools.product(BELL_LABELS, repeat=2):
        state = sv.tensor(sv.make_bell_pair(a), sv.make_bell_pair(b))
        for op in PAULI_OPS:
            state = sv.apply_pauli(state, int(rng.integers(4)), op)
        res = sv.bell_measure(state, 0, 2, rng)
        worst = max(worst, abs(res.post_state.norm() - 1.0), abs(sv.bell_probabilities(state, 0, 2).sum() - 1.0))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


CHECKS: list[tuple[str, Check]] = [
    ("encoding tables", check_encodings),
    ("pauli action vs oracle", check_pauli_action),
    ("swap phi+ x psi- on (2,3)", check_swap_phi_psi_minus),
    ("swap psi+ x phi+ on (1,3)", check_swap_psi_phi),
    ("swap phi+ x phi+ on (1,3)", check_swap_phi_phi),
    ("swap distribution vs oracle", check_swap_oracle_all),
    ("xor law", check_xor_law),
    ("inference round-trip", check_inference_roundtrip),
    ("worked example", check_worked_example),
    ("oracle normalization", check_oracle_normalization),
]


def run_all() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't crash the table
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
