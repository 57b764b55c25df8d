"""Engine for anonymous conference key agreement rounds.

One run proceeds as: anonymous notification, then L rounds of

    distribute -> noise -> extraction -> (KeyGen | Verification)

Extraction has the non-participants measure X, shrinking the shared state
to the sender/participant group, with the parity of their announced bits
telling the sender which phase the reduced state carries.  KeyGen rounds
measure Z with no communication at all; Verification rounds have the
participants measure random X/Y bases and announce truthfully while
everyone else, the sender included, publishes cover randomness.

All randomness derives from the configured seed through fixed substreams
(one per purpose and party), so a run is reproducible bit for bit and
adding an honest-strategy entry for a party changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .noise import (
    HONEST,
    AdversaryAction,
    AdversaryStrategy,
    NoiseModel,
    adversary_act,
)
from .records import (
    Announcement,
    AnnouncementPhase,
    AnnouncementPolicy,
    RoundCounts,
    RoundRecord,
    RoundType,
    SenderPrivate,
    Transcript,
    TranscriptHeader,
    Verdict,
)
from .simulator import (
    PauliBasis,
    PureState,
    measure_qubit,
    prepare_ghz,
    sample_noisy_state,
)

MIN_PARTIES = 3
MAX_PARTIES = 12
MAX_SEED = 2**64 - 1


class InsufficientDataError(ValueError):
    """Raised when a transcript is too short for the requested statistic."""


@dataclass(frozen=True)
class NetworkConfig:
    """Full description of one protocol run, private fields included."""

    n: int
    sender: int
    participants: tuple[int, ...]
    D: int
    L: int
    noise: NoiseModel = field(default_factory=NoiseModel.ideal)
    adversaries: Mapping[int, AdversaryStrategy] = field(default_factory=dict)
    announcement_policy: AnnouncementPolicy = AnnouncementPolicy.VERIFICATION_ONLY
    seed: int = 0

    def __post_init__(self) -> None:
        if not MIN_PARTIES <= self.n <= MAX_PARTIES:
            raise ValueError(f"party count must be in {MIN_PARTIES}..{MAX_PARTIES}")
        if not 0 <= self.sender < self.n:
            raise ValueError(f"sender {self.sender} out of range for n={self.n}")
        participants = tuple(sorted(set(int(p) for p in self.participants)))
        if len(participants) != len(self.participants):
            raise ValueError("participants must be distinct")
        if not participants:
            raise ValueError("at least one participant is required")
        if any(not 0 <= p < self.n for p in participants):
            raise ValueError(f"participants {participants} out of range for n={self.n}")
        if self.sender in participants:
            raise ValueError("the sender cannot be its own participant")
        object.__setattr__(self, "participants", participants)
        if self.D < 2:
            raise ValueError(f"security parameter D must be at least 2, got {self.D}")
        if self.L < 1:
            raise ValueError(f"round count L must be at least 1, got {self.L}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must fit in 64 bits")
        adversaries = dict(self.adversaries)
        group = set(participants) | {self.sender}
        for party, strategy in adversaries.items():
            if party in group:
                raise ValueError(
                    f"party {party} is not a non-participant; only non-participants "
                    "may carry an adversary strategy"
                )
            if not isinstance(strategy, AdversaryStrategy):
                raise TypeError(f"bad strategy for party {party}: {strategy!r}")
        object.__setattr__(self, "adversaries", adversaries)

    @property
    def num_participants(self) -> int:
        return len(self.participants)

    @property
    def group(self) -> tuple[int, ...]:
        """Sender plus participants, in party order."""
        return tuple(sorted((self.sender, *self.participants)))

    @property
    def non_participants(self) -> tuple[int, ...]:
        keyed = set(self.participants) | {self.sender}
        return tuple(p for p in range(self.n) if p not in keyed)

    def public_header(self) -> TranscriptHeader:
        return TranscriptHeader(
            n=self.n, rounds=self.L, security_D=self.D, policy=self.announcement_policy
        )


# Substream tags; fixed constants so seeded runs stay reproducible across versions.
_STREAM_PUBLIC = 0
_STREAM_NOISE = 1
_STREAM_QUANTUM = 2
_STREAM_NOTIFY = 3
_STREAM_COVER = 4
_STREAM_BASIS = 5
_STREAM_ADVERSARY = 6


def substream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *tags]))


class ProtocolRngs:
    """Independent, reproducible random streams for one run.

    Each purpose (and, where relevant, each party) draws from its own
    substream, so one component consuming more randomness never perturbs
    another and per-party cover traffic is reproducible.
    """

    def __init__(self, config: NetworkConfig) -> None:
        seed = config.seed
        self.public = substream(seed, _STREAM_PUBLIC)
        self.noise = substream(seed, _STREAM_NOISE)
        self.quantum = substream(seed, _STREAM_QUANTUM)
        self.notify = substream(seed, _STREAM_NOTIFY)
        self._cover = [substream(seed, _STREAM_COVER, p) for p in range(config.n)]
        self._basis = [substream(seed, _STREAM_BASIS, p) for p in range(config.n)]
        self._adversary = [
            substream(seed, _STREAM_ADVERSARY, p) for p in range(config.n)
        ]

    def cover(self, party: int) -> np.random.Generator:
        return self._cover[party]

    def basis(self, party: int) -> np.random.Generator:
        return self._basis[party]

    def adversary(self, party: int) -> np.random.Generator:
        return self._adversary[party]


def notification_shares(
    config: NetworkConfig, target: int, rng: np.random.Generator
) -> dict[int, int]:
    """One share per sending party for anonymously notifying ``target``.

    Every pair of senders holds a shared random mask (established over the
    simulated private pairwise channels); each mask enters exactly two
    shares, so the XOR of all shares collapses to the sender's notification
    bit while every single share stays marginally uniform.
    """
    senders = [p for p in range(config.n) if p != target]
    masks: dict[tuple[int, int], int] = {}
    for i_pos, i in enumerate(senders):
        for k in senders[i_pos + 1 :]:
            masks[(i, k)] = int(rng.integers(0, 2))
    shares: dict[int, int] = {}
    for i in senders:
        value = int(target in config.participants) if i == config.sender else 0
        for (a, b), mask in masks.items():
            if i == a or i == b:
                value ^= mask
        shares[i] = value
    return shares


def notify(config: NetworkConfig, rng: np.random.Generator) -> tuple[bool, ...]:
    """Each party learns exactly one bit: participant or not."""
    flags = []
    for target in range(config.n):
        bit = 0
        for share in notification_shares(config, target, rng).values():
            bit ^= share
        flags.append(bool(bit))
    return tuple(flags)


def schedule_round(D: int, public_rng: np.random.Generator) -> RoundType:
    """KeyGen with probability exactly 1/D, independently per round."""
    if D < 2:
        raise ValueError(f"security parameter D must be at least 2, got {D}")
    if public_rng.random() < 1.0 / D:
        return RoundType.KEYGEN
    return RoundType.VERIFICATION


@dataclass(frozen=True)
class ExtractionOutcome:
    state: PureState
    delta_announced: int | None
    delta_true: int
    announcements: tuple[Announcement, ...]
    defected_bits: dict[int, int]


def run_extraction(
    state: PureState,
    config: NetworkConfig,
    round_type: RoundType,
    rngs: ProtocolRngs,
    forced_bits: Mapping[int, int] | None = None,
) -> ExtractionOutcome:
    """Measure out the non-participants and post the extraction board.

    Honest non-participants measure X and announce the true bit; a defecting
    one measures Z and announces cover randomness.  The sender and the
    participants always announce cover randomness.  Announcements are posted
    in Verification rounds always, in KeyGen rounds only under the
    every-round policy.  ``forced_bits`` pins individual X outcomes, which
    the branch-enumeration tests use.
    """
    measured_true: dict[int, int] = {}
    defected: dict[int, int] = {}
    current = state
    # Descending party order keeps each remaining party at its own index.
    for party in reversed(config.non_participants):
        strategy = config.adversaries.get(party, HONEST)
        action = adversary_act(strategy, round_type, rngs.adversary(party))
        defects = action is AdversaryAction.MEASURE_Z_ANNOUNCE_RANDOM
        basis = PauliBasis.Z if defects else PauliBasis.X
        force = None if forced_bits is None else forced_bits.get(party)
        result, current = measure_qubit(
            current, party, basis, rngs.quantum, force_bit=force
        )
        measured_true[party] = result.bit
        if defects:
            defected[party] = result.bit

    delta_true = 0
    for bit in measured_true.values():
        delta_true ^= bit

    announce = (
        config.announcement_policy is AnnouncementPolicy.EVERY_ROUND
        or round_type is RoundType.VERIFICATION
    )
    announcements: tuple[Announcement, ...] = ()
    delta_announced: int | None = None
    if announce:
        board = []
        delta_announced = 0
        for party in range(config.n):
            if party in measured_true and party not in defected:
                bit, truthful = measured_true[party], True
            else:
                bit, truthful = int(rngs.cover(party).integers(0, 2)), False
            if party in measured_true:
                delta_announced ^= bit
            board.append(
                Announcement(party, AnnouncementPhase.EXTRACTION, (bit,), truthful)
            )
        announcements = tuple(board)
    return ExtractionOutcome(
        state=current,
        delta_announced=delta_announced,
        delta_true=delta_true,
        announcements=announcements,
        defected_bits=defected,
    )


def run_keygen_round(
    state: PureState, group: tuple[int, ...], rngs: ProtocolRngs
) -> dict[int, int]:
    """Everyone left measures Z; no communication takes place."""
    bits: dict[int, int] = {}
    current = state
    for qubit in range(len(group) - 1, -1, -1):
        result, current = measure_qubit(current, qubit, PauliBasis.Z, rngs.quantum)
        bits[group[qubit]] = result.bit
    return bits


@dataclass(frozen=True)
class VerificationOutcome:
    verdict: Verdict
    announcements: tuple[Announcement, ...]
    sender_basis: PauliBasis
    sender_outcome: int
    true_bits: dict[int, int]
    y_count: int


def run_verification_round(
    state: PureState,
    delta: int,
    config: NetworkConfig,
    rngs: ProtocolRngs,
) -> VerificationOutcome:
    """Random X/Y parity check against the expected stabilizer sign.

    Participants pick X or Y uniformly and announce (basis, outcome)
    truthfully; the sender completes the string to an even Y count and
    checks the outcome parity against (k/2 mod 2) XOR delta, announcing only
    cover bits itself.  Non-participants post two cover bits each.
    """
    group = config.group
    sender = config.sender
    participants = [p for p in group if p != sender]

    bases: dict[int, PauliBasis] = {}
    y_count = 0
    for party in participants:
        pick_y = int(rngs.basis(party).integers(0, 2))
        bases[party] = PauliBasis.Y if pick_y else PauliBasis.X
        y_count += pick_y
    sender_basis = PauliBasis.Y if y_count % 2 else PauliBasis.X
    bases[sender] = sender_basis
    k = y_count + (1 if sender_basis is PauliBasis.Y else 0)

    true_bits: dict[int, int] = {}
    current = state
    for qubit in range(len(group) - 1, -1, -1):
        party = group[qubit]
        result, current = measure_qubit(current, qubit, bases[party], rngs.quantum)
        true_bits[party] = result.bit

    parity = 0
    for bit in true_bits.values():
        parity ^= bit
    expected = ((k >> 1) & 1) ^ delta
    verdict = Verdict.PASS if parity == expected else Verdict.FAIL

    board = []
    for party in range(config.n):
        if party in bases and party != sender:
            bits = (int(bases[party] is PauliBasis.Y), true_bits[party])
            truthful = True
        else:
            pair = rngs.cover(party).integers(0, 2, size=2)
            bits = (int(pair[0]), int(pair[1]))
            truthful = False
        board.append(
            Announcement(party, AnnouncementPhase.VERIFICATION, bits, truthful)
        )
    return VerificationOutcome(
        verdict=verdict,
        announcements=tuple(board),
        sender_basis=sender_basis,
        sender_outcome=true_bits[sender],
        true_bits=true_bits,
        y_count=k,
    )


@dataclass(frozen=True)
class ProtocolResult:
    transcript: Transcript
    sender_key: tuple[int, ...]
    participant_keys: dict[int, tuple[int, ...]]
    config: NetworkConfig
    notification_flags: tuple[bool, ...]


def run_protocol(config: NetworkConfig) -> ProtocolResult:
    """Execute notification plus L rounds; deterministic given the seed."""
    rngs = ProtocolRngs(config)
    flags = notify(config, rngs.notify)

    p_mix = config.noise.mixing_weight(config.n)
    shared = prepare_ghz(config.n)
    group = config.group
    sender = config.sender

    records: list[RoundRecord] = []
    sender_key: list[int] = []
    participant_keys: dict[int, list[int]] = {p: [] for p in config.participants}

    for index in range(config.L):
        round_type = schedule_round(config.D, rngs.public)
        state = (
            shared if p_mix is None else sample_noisy_state(shared, p_mix, rngs.noise)
        )
        extraction = run_extraction(state, config, round_type, rngs)

        if round_type is RoundType.KEYGEN:
            bits = run_keygen_round(extraction.state, group, rngs)
            sender_key.append(bits[sender])
            for p in config.participants:
                participant_keys[p].append(bits[p])
            record = RoundRecord(
                round_index=index,
                round_type=round_type,
                announcements=extraction.announcements,
                sender_private=SenderPrivate(
                    delta=extraction.delta_announced,
                    basis=None,
                    outcome=None,
                    verdict=Verdict.NA,
                ),
                key_bit_sender=bits[sender],
                key_bits_participants={p: bits[p] for p in config.participants},
                defected_bits=extraction.defected_bits,
                delta_true=extraction.delta_true,
            )
        else:
            verification = run_verification_round(
                extraction.state, extraction.delta_announced, config, rngs
            )
            record = RoundRecord(
                round_index=index,
                round_type=round_type,
                announcements=extraction.announcements + verification.announcements,
                sender_private=SenderPrivate(
                    delta=extraction.delta_announced,
                    basis=verification.sender_basis,
                    outcome=verification.sender_outcome,
                    verdict=verification.verdict,
                ),
                key_bit_sender=None,
                key_bits_participants=None,
                defected_bits=extraction.defected_bits,
                delta_true=extraction.delta_true,
            )
        records.append(record)

    transcript = Transcript.assemble(config.public_header(), tuple(records))
    return ProtocolResult(
        transcript=transcript,
        sender_key=tuple(sender_key),
        participant_keys={p: tuple(bits) for p, bits in participant_keys.items()},
        config=config,
        notification_flags=flags,
    )


@dataclass(frozen=True)
class AnonymityStats:
    """Per-party announcement marginals over one transcript."""

    announcements_per_party: dict[int, int]
    frequencies: dict[int, dict[str, float]]
    slot_counts: dict[int, dict[str, int]]
    max_abs_deviation: float


_SLOT_NAMES = {
    (AnnouncementPhase.EXTRACTION, 0): "extraction[0]",
    (AnnouncementPhase.VERIFICATION, 0): "verification[0]",
    (AnnouncementPhase.VERIFICATION, 1): "verification[1]",
}


def anonymity_statistics(
    transcript: Transcript, min_announcements: int = 100
) -> AnonymityStats:
    """Empirical bit frequency per announcement slot, per party.

    A transcript with fewer than ``min_announcements`` announcements for any
    party raises :class:`InsufficientDataError`; the frequencies would be
    too loose to flag a bias.
    """
    ones: dict[int, dict[str, int]] = {p: {} for p in range(transcript.header.n)}
    totals: dict[int, dict[str, int]] = {p: {} for p in range(transcript.header.n)}
    announcement_counts = {p: 0 for p in range(transcript.header.n)}
    for record in transcript.records:
        for ann in record.announcements:
            announcement_counts[ann.party] += 1
            for slot, bit in enumerate(ann.bits):
                name = _SLOT_NAMES[(ann.phase, slot)]
                totals[ann.party][name] = totals[ann.party].get(name, 0) + 1
                ones[ann.party][name] = ones[ann.party].get(name, 0) + bit
    low = min(announcement_counts.values())
    if low < min_announcements:
        raise InsufficientDataError(
            f"need at least {min_announcements} announcements per party, "
            f"worst party has {low}"
        )
    frequencies = {
        p: {name: ones[p][name] / count for name, count in totals[p].items()}
        for p in totals
    }
    deviation = max(
        abs(freq - 0.5) for per_party in frequencies.values() for freq in per_party.values()
    )
    return AnonymityStats(
        announcements_per_party=announcement_counts,
        frequencies=frequencies,
        slot_counts=totals,
        max_abs_deviation=deviation,
    )
