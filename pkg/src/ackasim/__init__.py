"""Anonymous conference key agreement over simulated GHZ networks.

The package simulates GHZ-state distribution among n parties, runs the
anonymous KeyGen/Verification protocol under white noise and non-participant
adversaries, and computes the security bookkeeping (guessing probabilities,
failure rates, key rates) for the resulting transcripts.
"""

from .noise import (
    AdversaryAction,
    AdversaryKind,
    AdversaryStrategy,
    DetectionStats,
    NoiseKind,
    NoiseModel,
    adversary_act,
    calibrate_white_noise,
    detection_experiment,
)
from .protocol import (
    AnonymityStats,
    NetworkConfig,
    ProtocolResult,
    anonymity_statistics,
    notify,
    run_protocol,
    schedule_round,
)
from .records import (
    Announcement,
    AnnouncementPhase,
    AnnouncementPolicy,
    RoundRecord,
    RoundType,
    Transcript,
    Verdict,
)
from .security import (
    SecurityInputs,
    SecurityReport,
    binary_entropy,
    build_report,
    corrected_eta,
    effective_d,
    failure_rate,
    fidelity_failure_floor,
    guess_prob_no_fail,
    guess_prob_worst,
)
from .simulator import (
    ImpossibleBranchError,
    MeasurementResult,
    MixedState,
    PauliBasis,
    PureState,
    apply_pauli,
    apply_pauli_z,
    depolarize_global,
    fidelity,
    measure_qubit,
    pauli_string,
    prepare_ghz,
    pure_fidelity,
    sample_noisy_state,
    stabilizer_expectation,
)

__all__ = [
    "AdversaryAction",
    "AdversaryKind",
    "AdversaryStrategy",
    "Announcement",
    "AnnouncementPhase",
    "AnnouncementPolicy",
    "AnonymityStats",
    "DetectionStats",
    "ImpossibleBranchError",
    "MeasurementResult",
    "MixedState",
    "NetworkConfig",
    "NoiseKind",
    "NoiseModel",
    "PauliBasis",
    "ProtocolResult",
    "PureState",
    "RoundRecord",
    "RoundType",
    "SecurityInputs",
    "SecurityReport",
    "Transcript",
    "Verdict",
    "adversary_act",
    "anonymity_statistics",
    "apply_pauli",
    "apply_pauli_z",
    "binary_entropy",
    "build_report",
    "calibrate_white_noise",
    "corrected_eta",
    "depolarize_global",
    "detection_experiment",
    "effective_d",
    "failure_rate",
    "fidelity",
    "fidelity_failure_floor",
    "guess_prob_no_fail",
    "guess_prob_worst",
    "measure_qubit",
    "notify",
    "pauli_string",
    "prepare_ghz",
    "pure_fidelity",
    "run_protocol",
    "sample_noisy_state",
    "schedule_round",
    "stabilizer_expectation",
]

__version__ = "0.1.0"
