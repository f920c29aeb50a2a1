"""
Monte Carlo campaigns: many seeded sessions, per-session summaries, and an
aggregate record whose every number can be recomputed from the summaries.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from swapqkd.adversary import ATTACK_NAMES, KEY_BITS_PER_ROUND, detection_curve, make_attack
from swapqkd.protocol import DEFAULT_DETECTION_KS, SessionConfig, dump_transcript, run_session

RECORD_SCHEMA = "swapqkd.campaign/1"
Z95 = 1.959963984540054


@dataclass(frozen=True)
class CampaignSpec:
    subcommand: str = "run"
    sessions: int = 100
    rounds: int = 100
    check_fraction: float = 0.0
    attack: str = "none"
    overlap: float = 0.0
    seed: int = 0
    output_format: str = "json"
    out: str | None = None
    parallel: int = 1
    ks: tuple[int, ...] = DEFAULT_DETECTION_KS
    dump_transcript: str | None = None

    def __post_init__(self):
        if self.subcommand not in ("run", "attack", "sweep"):
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if self.sessions < 1:
            raise ValueError("sessions must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not 0.0 <= self.check_fraction < 1.0:
            raise ValueError("check fraction must be in [0, 1)")
        if self.attack not in ATTACK_NAMES:
            raise ValueError(f"attack must be one of {ATTACK_NAMES}")
        if self.subcommand != "run" and self.attack == "none":
            raise ValueError(f"{self.subcommand} needs an attack other than 'none'")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must be in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.output_format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if self.parallel < 1:
            raise ValueError("parallel must be >= 1")
        if any(k < 0 for k in self.ks):
            raise ValueError("k values must be non-negative")

    def attack_model(self):
        return make_attack(self.attack, self.overlap)


def session_seed(master_seed: int, index: int) -> int:
    """Stable 64-bit seed for session ``index``; independent of execution order."""
    state = np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def _run_one(args) -> tuple[dict, str | None]:
    spec, index = args
    seed = session_seed(spec.seed, index)
    config = SessionConfig(
        rounds=spec.rounds,
        check_fraction=spec.check_fraction,
        seed=seed,
        attack=spec.attack_model(),
        detection_ks=tuple(k for k in spec.ks if k > 0),
    )
    result = run_session(config)
    transcript = dump_transcript(result.messages, session=index) if spec.dump_transcript else None
    return summarize_session(index, result), transcript


def summarize_session(index: int, result) -> dict:
    st = result.adversary_stats
    rec = {
        "schema": RECORD_SCHEMA,
        "record": "session",
        "session": index,
        "seed": result.config.seed,
        "rounds": st.rounds,
        "checked_rounds": result.detection.checked_rounds,
        "mismatches": result.detection.mismatches,
        "aborted": result.detection.aborted,
        "delivered_bits": len(result.bob_key),
        "keys_equal": result.alice_key == result.bob_key,
        "key_rate": len(result.bob_key) / st.rounds,
        "channel_matches": st.channel_matches,
        "eve_guessed_rounds": st.eve_guessed_rounds,
        "eve_full_correct": st.eve_full_correct,
        "eve_certain_correct": st.eve_certain_correct,
        "known_bits": st.known_bits,
        "cross_matches": st.cross_matches,
    }
    for k, (blocks, detected) in sorted(st.blocks.items()):
        rec[f"blocks_k{k}"] = blocks
        rec[f"detected_k{k}"] = detected
    return rec


def _proportion(successes: int, trials: int) -> tuple[float | None, float | None]:
    if trials == 0:
        return None, None
    p = successes / trials
    return p, Z95 * math.sqrt(p * (1.0 - p) / trials)


@dataclass
class CampaignStats:
    spec: CampaignSpec
    sessions: list[dict]
    aggregate: dict = field(default_factory=dict)
    detection_table: list[dict] = field(default_factory=list)

    @property
    def all_aborted(self) -> bool:
        return all(s["aborted"] for s in self.sessions)


def aggregate_sessions(spec: CampaignSpec, sessions: list[dict]) -> dict:
    """Aggregate record computed only from per-session summaries."""
    attack = spec.attack_model()
    rounds = sum(s["rounds"] for s in sessions)
    delivered = sum(s["delivered_bits"] for s in sessions)
    rates = [s["key_rate"] for s in sessions]
    n = len(sessions)
    key_hw = Z95 * float(np.std(rates, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    aborts = sum(s["aborted"] for s in sessions)

    agg = {
        "schema": RECORD_SCHEMA,
        "record": "aggregate",
        "subcommand": spec.subcommand,
        "attack": spec.attack,
        "overlap": spec.overlap if spec.attack == "entangle" else None,
        "master_seed": spec.seed,
        "check_fraction": spec.check_fraction,
        "sessions": n,
        "rounds": rounds,
        "checked_rounds": sum(s["checked_rounds"] for s in sessions),
        "delivered_bits": delivered,
        "key_rate": delivered / rounds,
        "key_rate_hw": key_hw,
    }
    agg["abort_rate"], agg["abort_rate_hw"] = _proportion(aborts, n)
    agg["match_rate"], agg["match_rate_hw"] = _proportion(sum(s["channel_matches"] for s in sessions), rounds)
    guessed = sum(s["eve_guessed_rounds"] for s in sessions)
    agg["eve_guess_rate"], agg["eve_guess_rate_hw"] = _proportion(
        sum(s["eve_full_correct"] for s in sessions), guessed
    )
    agg["eve_certain_rate"], agg["eve_certain_rate_hw"] = _proportion(
        sum(s["eve_certain_correct"] for s in sessions), guessed
    )
    known = sum(s["known_bits"] for s in sessions)
    agg["known_bit_fraction"] = None if spec.attack == "none" else known / (KEY_BITS_PER_ROUND * rounds)
    if spec.attack == "mitm":
        agg["cross_match_rate"], agg["cross_match_rate_hw"] = _proportion(
            sum(s["cross_matches"] for s in sessions), rounds
        )
    if spec.subcommand in ("attack", "sweep"):
        for k in spec.ks:
            emp, hw = _detection(sessions, k)
            agg[f"detection_k{k}"] = emp
            agg[f"detection_k{k}_hw"] = hw
            agg[f"detection_k{k}_analytic"] = detection_curve(attack, k)
    return agg


def _detection(sessions: list[dict], k: int) -> tuple[float | None, float | None]:
    # Zero checks can never detect anything.
    if k == 0:
        return 0.0, 0.0
    blocks = sum(s[f"blocks_k{k}"] for s in sessions)
    detected = sum(s[f"detected_k{k}"] for s in sessions)
    return _proportion(detected, blocks)


def detection_table(spec: CampaignSpec, sessions: list[dict]) -> list[dict]:
    attack = spec.attack_model()
    rows = []
    for k in spec.ks:
        blocks = 0 if k == 0 else sum(s[f"blocks_k{k}"] for s in sessions)
        detected = 0 if k == 0 else sum(s[f"detected_k{k}"] for s in sessions)
        emp, hw = _detection(sessions, k)
        rows.append({
            "schema": RECORD_SCHEMA,
            "record": "detection",
            "attack": spec.attack,
            "k": k,
            "blocks": blocks,
            "detected": detected,
            "empirical": emp,
            "empirical_hw": hw,
            "analytic": detection_curve(attack, k),
        })
    return rows


def run_campaign(spec: CampaignSpec) -> tuple[CampaignStats, list[str]]:
    """Execute all sessions; returns stats and (if requested) per-session transcripts."""
    jobs = [(spec, i) for i in range(spec.sessions)]
    if spec.parallel > 1:
        with ProcessPoolExecutor(max_workers=spec.parallel) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * spec.parallel))))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r[0]["session"])
    sessions = [r[0] for r in results]
    transcripts = [r[1] for r in results if r[1] is not None]
    stats = CampaignStats(spec, sessions, aggregate_sessions(spec, sessions))
    if spec.subcommand == "sweep":
        stats.detection_table = detection_table(spec, sessions)
    return stats, transcripts


def format_records(records: list[dict], output_format: str) -> str:
    if output_format == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    columns: list[str] = []
    for r in records:
        for key in r:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def campaign_records(stats: CampaignStats) -> list[dict]:
    if stats.spec.subcommand == "sweep":
        return stats.detection_table
    return [*stats.sessions, stats.aggregate]
