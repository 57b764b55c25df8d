"""Noise calibration and dishonest-party behavior.

The only noise channel is global white noise: the shared state is replaced
by a Werner-like mixture whose single knob is the target fidelity.  The
modeled adversary is a non-participant who swaps its X measurement for a Z
measurement (joining the key instead of extracting) and covers with random
announcements.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .records import RoundType, Verdict


class NoiseKind(Enum):
    IDEAL = "ideal"
    GLOBAL_WHITE = "global_white"


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind = NoiseKind.IDEAL
    F_target: float = 1.0

    def __post_init__(self) -> None:
        if self.kind is NoiseKind.IDEAL:
            if self.F_target != 1.0:
                raise ValueError("ideal noise has F_target fixed at 1.0")
        elif not 0.0 < self.F_target <= 1.0:
            raise ValueError(f"F_target must be in (0, 1], got {self.F_target}")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(NoiseKind.IDEAL, 1.0)

    @classmethod
    def global_white(cls, f_target: float) -> "NoiseModel":
        return cls(NoiseKind.GLOBAL_WHITE, f_target)

    @classmethod
    def from_fidelity(cls, f_target: float) -> "NoiseModel":
        """F = 1 means an ideal channel, anything below is white noise."""
        return cls.ideal() if f_target == 1.0 else cls.global_white(f_target)

    def mixing_weight(self, n: int) -> float | None:
        """Pure-state weight for an n-party register; None when ideal."""
        if self.kind is NoiseKind.IDEAL:
            return None
        return calibrate_white_noise(self.F_target, n)


def calibrate_white_noise(f_target: float, n: int) -> float:
    """Invert F = p + (1 - p)/2**n for the mixing weight p.

    The fidelity floor 2**-n (maximally mixed state) is the lowest reachable
    target; anything below it or above 1 is a range error.
    """
    if not 1 <= n <= 12:
        raise ValueError(f"register size must be in 1..12, got {n}")
    floor = 2.0 ** -n
    if not floor <= f_target <= 1.0:
        raise ValueError(
            f"target fidelity {f_target} is unreachable for n={n} "
            f"(must lie in [{floor}, 1])"
        )
    return (f_target - floor) / (1.0 - floor)


class AdversaryKind(Enum):
    HONEST = "honest"
    ALWAYS_Z = "always_Z"
    GUESS_KEYGEN = "guess_keygen"


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: AdversaryKind = AdversaryKind.HONEST
    p_guess: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_guess <= 1.0:
            raise ValueError(f"p_guess must be in [0, 1], got {self.p_guess}")
        if self.kind is not AdversaryKind.GUESS_KEYGEN and self.p_guess != 0.0:
            raise ValueError(f"p_guess is only meaningful for guess_keygen")

    @classmethod
    def honest(cls) -> "AdversaryStrategy":
        return cls(AdversaryKind.HONEST)

    @classmethod
    def always_z(cls) -> "AdversaryStrategy":
        return cls(AdversaryKind.ALWAYS_Z)

    @classmethod
    def guess_keygen(cls, p_guess: float) -> "AdversaryStrategy":
        return cls(AdversaryKind.GUESS_KEYGEN, p_guess)


HONEST = AdversaryStrategy.honest()


class AdversaryAction(Enum):
    MEASURE_X_ANNOUNCE_TRUE = "measure_X_announce_true"
    MEASURE_Z_ANNOUNCE_RANDOM = "measure_Z_announce_random"


def adversary_act(
    strategy: AdversaryStrategy,
    round_type: RoundType,
    rng: np.random.Generator,
) -> AdversaryAction:
    """Decide a non-participant's behavior for one round.

    Round types are public (the biased scheduling source is public), so the
    decision may depend on them.  A guessing adversary commits a fresh
    Bernoulli(p_guess) guess every round and defects only when the guess
    fires on an actual KeyGen round.
    """
    if strategy.kind is AdversaryKind.HONEST:
        return AdversaryAction.MEASURE_X_ANNOUNCE_TRUE
    if strategy.kind is AdversaryKind.ALWAYS_Z:
        return AdversaryAction.MEASURE_Z_ANNOUNCE_RANDOM
    fired = rng.random() < strategy.p_guess
    if fired and round_type is RoundType.KEYGEN:
        return AdversaryAction.MEASURE_Z_ANNOUNCE_RANDOM
    return AdversaryAction.MEASURE_X_ANNOUNCE_TRUE


@dataclass(frozen=True)
class DetectionStats:
    """What one dishonest non-participant achieved and risked."""

    rounds_defected: int
    verification_defections: int
    verification_failures_caused: int
    keygen_defections: int
    keygen_bits_correct: int

    def __post_init__(self) -> None:
        if self.verification_failures_caused > self.verification_defections:
            raise ValueError("cannot cause more failures than defected rounds")
        if self.keygen_bits_correct > self.keygen_defections:
            raise ValueError("cannot match more key bits than defected KeyGen rounds")


def detection_experiment(config, rounds: int | None = None) -> DetectionStats:
    """Run the protocol with a single dishonest non-participant and tally.

    Requires a noiseless configuration with exactly one adversary so every
    verification failure is attributable to the defection.
    """
    from .protocol import run_protocol  # deferred; protocol depends on this module

    if len(config.adversaries) != 1:
        raise ValueError("detection experiments take exactly one adversary")
    if config.noise.kind is not NoiseKind.IDEAL:
        raise ValueError("detection experiments require a noiseless configuration")
    if rounds is not None:
        config = replace(config, L=rounds)
    (adversary_party,) = config.adversaries.keys()
    result = run_protocol(config)

    defected = ver_def = ver_fail = key_def = key_hit = 0
    for rec in result.transcript.records:
        if adversary_party not in rec.defected_bits:
            continue
        defected += 1
        if rec.round_type is RoundType.VERIFICATION:
            ver_def += 1
            if rec.sender_private.verdict is Verdict.FAIL:
                ver_fail += 1
        else:
            key_def += 1
            if rec.defected_bits[adversary_party] == rec.key_bit_sender:
                key_hit += 1
    return DetectionStats(
        rounds_defected=defected,
        verification_defections=ver_def,
        verification_failures_caused=ver_fail,
        keygen_defections=key_def,
        keygen_bits_correct=key_hit,
    )
