"""Round records, announcements, and in-memory transcripts.

A :class:`RoundRecord` keeps three kinds of information side by side:

* the public announcement board (everything any party could observe),
* the sender's private view (parity bit, own basis/outcome, verdict),
* simulation-only ground truth (participants' key bits, defections).

Only the first group is ever written to the public transcript file; the
second goes to the sender-private file; the third stays in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .simulator import PauliBasis


class RoundType(Enum):
    KEYGEN = "K"
    VERIFICATION = "V"


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    NA = "-"


class AnnouncementPhase(Enum):
    EXTRACTION = "extraction"
    VERIFICATION = "verification"


class AnnouncementPolicy(Enum):
    VERIFICATION_ONLY = "verification_only"
    EVERY_ROUND = "every_round"


_BITS_PER_PHASE = {AnnouncementPhase.EXTRACTION: 1, AnnouncementPhase.VERIFICATION: 2}


@dataclass(frozen=True)
class Announcement:
    """One party's public contribution to a round.

    ``truthful`` records whether the bits are real measurement data or cover
    randomness; it exists only for the sender's bookkeeping and analysis and
    is never serialized into the public transcript.
    """

    party: int
    phase: AnnouncementPhase
    bits: tuple[int, ...]
    truthful: bool

    def __post_init__(self) -> None:
        expected = _BITS_PER_PHASE[self.phase]
        if len(self.bits) != expected:
            raise ValueError(
                f"{self.phase.value} announcements carry exactly {expected} bit(s)"
            )
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"announcement bits must be 0/1, got {self.bits}")


@dataclass(frozen=True)
class SenderPrivate:
    """What only the sender learns in a round."""

    delta: int | None
    basis: PauliBasis | None
    outcome: int | None
    verdict: Verdict


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    round_type: RoundType
    announcements: tuple[Announcement, ...]
    sender_private: SenderPrivate
    key_bit_sender: int | None
    key_bits_participants: dict[int, int] | None
    # Simulation-only ground truth, never serialized:
    defected_bits: dict[int, int] = field(default_factory=dict)
    delta_true: int | None = None

    def __post_init__(self) -> None:
        is_verification = self.round_type is RoundType.VERIFICATION
        if (self.sender_private.verdict is not Verdict.NA) != is_verification:
            raise ValueError("verdict must be set exactly for Verification rounds")
        has_keys = self.key_bit_sender is not None
        if has_keys != (self.round_type is RoundType.KEYGEN):
            raise ValueError("key bits must be present exactly for KeyGen rounds")
        if has_keys != (self.key_bits_participants is not None):
            raise ValueError("sender and participant key bits must appear together")

    def announcements_in(self, phase: AnnouncementPhase) -> tuple[Announcement, ...]:
        return tuple(a for a in self.announcements if a.phase is phase)


@dataclass(frozen=True)
class TranscriptHeader:
    """Public configuration summary; contains no role or seed information."""

    n: int
    rounds: int
    security_D: int
    policy: AnnouncementPolicy


@dataclass(frozen=True)
class RoundCounts:
    num_keygen: int
    num_verification: int
    num_verification_failed: int


@dataclass(frozen=True)
class Transcript:
    header: TranscriptHeader
    records: tuple[RoundRecord, ...]
    counts: RoundCounts

    def __post_init__(self) -> None:
        expected = _count_rounds(self.records)
        if expected != self.counts:
            raise ValueError(f"counts {self.counts} inconsistent with records {expected}")
        if self.counts.num_keygen + self.counts.num_verification != len(self.records):
            raise ValueError("round-type counts must sum to the number of records")
        for pos, rec in enumerate(self.records):
            if rec.round_index != pos:
                raise ValueError(f"record {pos} has round_index {rec.round_index}")

    @classmethod
    def assemble(
        cls, header: TranscriptHeader, records: tuple[RoundRecord, ...]
    ) -> "Transcript":
        return cls(header=header, records=records, counts=_count_rounds(records))


def _count_rounds(records: tuple[RoundRecord, ...]) -> RoundCounts:
    keygen = sum(1 for r in records if r.round_type is RoundType.KEYGEN)
    fails = sum(1 for r in records if r.sender_private.verdict is Verdict.FAIL)
    return RoundCounts(
        num_keygen=keygen,
        num_verification=len(records) - keygen,
        num_verification_failed=fails,
    )
