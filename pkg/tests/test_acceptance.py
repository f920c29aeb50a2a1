"""Exit criteria for the simulator, one test per criterion."""

import itertools
import time
from fractions import Fraction

import numpy as np

from swapqkd import statevector as sv
from swapqkd.bell import (
    BELL_LABELS,
    PAULI_OPS,
    PauliOp,
    apply_pauli_first,
    infer_imaginary,
    infer_pauli,
    swap_distribution,
    swap_residual,
)
from swapqkd.campaign import CampaignSpec, campaign_records, format_records, run_campaign
from swapqkd.protocol import SessionConfig, alice_round, bob_round, run_session

PHI_P, PSI_P, PSI_M, PHI_M = BELL_LABELS
KS = (1, 2, 4, 8)


def test_1_swap_rule_matches_oracle(criterion):
    start = time.perf_counter()
    failures = []
    for a, b in itertools.product(BELL_LABELS, repeat=2):
        state = sv.tensor(sv.make_bell_pair(a), sv.make_bell_pair(b))
        probs = sv.bell_probabilities(state, 0, 2)
        for br in swap_distribution(a, b):
            p = probs[br.outcome.index]
            _, post = sv.project_bell(state, 0, 2, br.outcome)
            residual = sv.identify_bell(sv.reduced_pair(post, 1, 3))
            if (
                br.probability != Fraction(1, 4)
                or Fraction(p).limit_denominator(64) != br.probability
                or abs(p - 0.25) > 1e-12
                or residual != br.residual
            ):
                failures.append((a, b, br.outcome))
    elapsed = time.perf_counter() - start
    criterion(1, "swap rule == oracle on 16 pairs", not failures and elapsed < 1.0,
              f"failures={len(failures)} time={elapsed:.3f}s")


def test_2_worked_example(criterion):
    alice, bob_pair = alice_round(np.random.default_rng(0), PauliOp.SIGMA1, forced_outcome=PSI_M)
    op, bob_bits = bob_round(bob_pair, alice.announced_13)
    ok = (
        bob_pair == PHI_M
        and alice.imaginary_13 == PHI_M
        and op == PauliOp.SIGMA1
        and alice.key_bits == bob_bits == (0, 1, 1, 1, 1, 0)
    )
    bits = "".join(map(str, bob_bits))
    criterion(2, "worked example: certain 01, random 11 and 10", ok, f"bits={bits[:2]}|{bits[2:4]}|{bits[4:]}")


def test_3_key_rate(criterion):
    exact, _ = run_campaign(CampaignSpec(sessions=100, rounds=100, check_fraction=0.0, seed=1))
    rates = {}
    for f in (0.2, 0.5):
        stats, _ = run_campaign(CampaignSpec(sessions=100, rounds=100, check_fraction=f, seed=2))
        rates[f] = stats.aggregate["key_rate"]
    ok = exact.aggregate["key_rate"] == 6.0 and all(abs(r - 6 * (1 - f)) <= 0.1 for f, r in rates.items())
    criterion(3, "key rate 6 bits/round, 6(1-f) +- 0.1 with checks", ok,
              f"f=0: {exact.aggregate['key_rate']}, " + ", ".join(f"f={f}: {r:.4f}" for f, r in rates.items()))


def test_4_honest_completeness(criterion):
    rng = np.random.default_rng(4)
    bad = 0
    for seed in range(100):
        payload = tuple(int(b) for b in rng.integers(0, 2, size=200))
        for f in (0.0, 0.2):
            result = run_session(SessionConfig(rounds=100, check_fraction=f, seed=seed, pauli_source=payload))
            expected = tuple(
                bit for r in result.per_round if not r.checked for bit in payload[2 * r.round_index: 2 * r.round_index + 2]
            )
            if f == 0.0:
                expected_ok = result.certain_bits == payload
            else:
                expected_ok = result.certain_bits == expected
            if result.detection.aborted or result.alice_key != result.bob_key or not expected_ok:
                bad += 1
    criterion(4, "honest sessions: equal keys, no aborts, certain bits = payload", bad == 0, f"bad sessions={bad}/200")


def _detection_ok(agg, tol=0.03):
    diffs = {k: abs(agg[f"detection_k{k}"] - agg[f"detection_k{k}_analytic"]) for k in KS}
    return all(d <= tol for d in diffs.values()), diffs


def test_5_entangle_source(criterion):
    start = time.perf_counter()
    stats, _ = run_campaign(CampaignSpec("attack", sessions=100, rounds=100, check_fraction=0.25,
                                         attack="entangle", overlap=0.0, seed=5))
    elapsed = time.perf_counter() - start
    agg = stats.aggregate
    det_ok, diffs = _detection_ok(agg)
    ok = abs(agg["match_rate"] - 0.5) <= 0.02 and det_ok and elapsed <= 30
    criterion(5, "entangle source: match 0.50 +- 0.02, detection +- 0.03", ok,
              f"match={agg['match_rate']:.4f} max|det diff|={max(diffs.values()):.4f} time={elapsed:.1f}s")


def test_6_man_in_the_middle(criterion):
    stats, _ = run_campaign(CampaignSpec("attack", sessions=100, rounds=100, check_fraction=0.25,
                                         attack="mitm", seed=6))
    agg = stats.aggregate
    det_ok, diffs = _detection_ok(agg)
    ok = abs(agg["cross_match_rate"] - 0.25) <= 0.02 and det_ok
    criterion(6, "MITM: cross-side match 0.25 +- 0.02, detection +- 0.03", ok,
              f"cross={agg['cross_match_rate']:.4f} max|det diff|={max(diffs.values()):.4f}")


def test_7_passive_guess(criterion):
    stats, _ = run_campaign(CampaignSpec("attack", sessions=100, rounds=100, check_fraction=0.25,
                                         attack="passive", seed=7))
    agg = stats.aggregate
    ok = (
        abs(agg["eve_guess_rate"] - 0.25) <= 0.02
        and agg["abort_rate"] == 0.0
        and agg["known_bit_fraction"] == 2 / 6
    )
    criterion(7, "passive: guess 0.25 +- 0.02, no aborts, known bits 2/6", ok,
              f"guess={agg['eve_guess_rate']:.4f} aborts={agg['abort_rate']} known={agg['known_bit_fraction']:.4f}")


def test_8_inference_round_trip(criterion):
    failures = 0
    cases = 0
    for a, b, op, o in itertools.product(BELL_LABELS, BELL_LABELS, PAULI_OPS, BELL_LABELS):
        cases += 1
        residual = swap_residual(apply_pauli_first(op, a), b, o)
        if infer_pauli(o, residual, a, b) != op:
            failures += 1
        if infer_imaginary(a, b, swap_residual(a, b, o)) != o:
            failures += 1
    criterion(8, "inference inverts the forward protocol (4^4 cases)", failures == 0 and cases == 256,
              f"cases={cases} failures={failures}")


def test_9_determinism(criterion):
    specs = [
        CampaignSpec("run", sessions=10, rounds=50, check_fraction=0.3, seed=9),
        CampaignSpec("attack", sessions=10, rounds=50, check_fraction=0.3, attack="entangle", seed=9),
        CampaignSpec("attack", sessions=10, rounds=50, check_fraction=0.3, attack="mitm", seed=9),
        CampaignSpec("attack", sessions=10, rounds=50, check_fraction=0.3, attack="passive", seed=9),
        CampaignSpec("sweep", sessions=10, rounds=50, attack="entangle", seed=9, ks=(0, 1, 2, 4, 8)),
    ]
    same = True
    for spec in specs:
        for fmt in ("json", "csv"):
            outs = []
            for _ in range(2):
                stats, _ = run_campaign(spec)
                outs.append(format_records(campaign_records(stats), fmt).encode())
            same &= outs[0] == outs[1]
    criterion(9, "same master seed gives byte-identical output", same, f"campaigns={len(specs)} x 2 formats")
