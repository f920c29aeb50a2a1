"""Simulator for entanglement-swapping quantum key distribution with certain key bits."""

from swapqkd.adversary import (
    EntangleSource,
    EveRecord,
    ManInTheMiddle,
    NoAttack,
    PassiveGuess,
    detection_curve,
    make_attack,
    passive_guess,
)
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
from swapqkd.protocol import (
    RoundRecord,
    SessionConfig,
    SessionResult,
    alice_round,
    bob_round,
    run_session,
    sift_and_check,
)

__version__ = "0.1.0"
