"""Line-oriented transcript files.

Two files per run.  The public transcript holds only what every party on
the network could observe: the round schedule, the announcement board, and
the aggregate counts the sender publishes with the key-rate claim.  The
sender-private file holds roles, the seed, per-round parity bits, the
sender's own verification measurements, verdicts, and key bits.

Formats are fixed byte-for-byte (see README for the grammar); identical
runs serialize identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .protocol import NetworkConfig, ProtocolResult
from .records import (
    AnnouncementPhase,
    AnnouncementPolicy,
    RoundCounts,
    RoundType,
    Transcript,
    Verdict,
)
from .simulator import PauliBasis

PUBLIC_MAGIC = "ackasim-public v1"
PRIVATE_MAGIC = "ackasim-private v1"


class TranscriptFormatError(ValueError):
    """Malformed transcript file; the message names the offending line."""


def pack_bits(bits: Sequence[int]) -> str:
    """Hex-pack a bit sequence, first bit most significant, zero-padded left."""
    width = (len(bits) + 3) // 4
    value = 0
    for bit in bits:
        value = (value << 1) | (bit & 1)
    return format(value, f"0{width}x")


def unpack_bits(text: str, count: int) -> tuple[int, ...]:
    width = (count + 3) // 4
    if len(text) != width:
        raise ValueError(f"expected {width} hex digits for {count} bits, got {text!r}")
    value = int(text, 16)
    if value >> count:
        raise ValueError(f"{text!r} sets bits beyond the declared width {count}")
    return tuple((value >> (count - 1 - i)) & 1 for i in range(count))


def _extraction_bits(record) -> list[int] | None:
    board = record.announcements_in(AnnouncementPhase.EXTRACTION)
    if not board:
        return None
    return [a.bits[0] for a in sorted(board, key=lambda a: a.party)]


def _verification_bits(record) -> list[int] | None:
    board = record.announcements_in(AnnouncementPhase.VERIFICATION)
    if not board:
        return None
    bits: list[int] = []
    for a in sorted(board, key=lambda a: a.party):
        bits.extend(a.bits)
    return bits


def public_transcript_lines(transcript: Transcript) -> list[str]:
    head = transcript.header
    lines = [
        PUBLIC_MAGIC,
        f"n={head.n} rounds={head.rounds} security_D={head.security_D} "
        f"policy={head.policy.value}",
    ]
    for record in transcript.records:
        ext = _extraction_bits(record)
        ver = _verification_bits(record)
        lines.append(
            f"{record.round_index} {record.round_type.value} "
            f"{pack_bits(ext) if ext is not None else '-'} "
            f"{pack_bits(ver) if ver is not None else '-'}"
        )
    counts = transcript.counts
    lines.append(
        f"counts keygen={counts.num_keygen} verification={counts.num_verification} "
        f"failed={counts.num_verification_failed}"
    )
    return lines


def private_transcript_lines(result: ProtocolResult, label: str) -> list[str]:
    config = result.config
    lines = [
        PRIVATE_MAGIC,
        f"n={config.n} rounds={config.L} security_D={config.D} "
        f"policy={config.announcement_policy.value} seed={config.seed} "
        f"fidelity={config.noise.F_target!r} label={label}",
        f"sender={config.sender} participants="
        + ",".join(str(p) for p in config.participants),
    ]
    for record in result.transcript.records:
        private = record.sender_private
        delta = "-" if private.delta is None else str(private.delta)
        basis = "-" if private.basis is None else private.basis.value
        outcome = "-" if private.outcome is None else str(private.outcome)
        verdict = private.verdict.value
        if record.key_bit_sender is None:
            key_s = "-"
            key_p = "-"
        else:
            key_s = str(record.key_bit_sender)
            key_p = pack_bits(
                [record.key_bits_participants[p] for p in config.participants]
            )
        lines.append(
            f"{record.round_index} {record.round_type.value} "
            f"{delta} {basis} {outcome} {verdict} {key_s} {key_p}"
        )
    counts = result.transcript.counts
    lines.append(
        f"counts keygen={counts.num_keygen} verification={counts.num_verification} "
        f"failed={counts.num_verification_failed}"
    )
    return lines


def write_public_transcript(path: str | Path, transcript: Transcript) -> None:
    Path(path).write_text("\n".join(public_transcript_lines(transcript)) + "\n")


def write_private_transcript(
    path: str | Path, result: ProtocolResult, label: str
) -> None:
    Path(path).write_text("\n".join(private_transcript_lines(result, label)) + "\n")


@dataclass(frozen=True)
class PublicRound:
    index: int
    round_type: RoundType
    extraction_bits: tuple[int, ...] | None
    verification_bits: tuple[int, ...] | None


@dataclass(frozen=True)
class PublicTranscriptFile:
    n: int
    rounds: int
    security_D: int
    policy: AnnouncementPolicy
    entries: tuple[PublicRound, ...]
    counts: RoundCounts


@dataclass(frozen=True)
class PrivateRound:
    index: int
    round_type: RoundType
    delta: int | None
    basis: PauliBasis | None
    outcome: int | None
    verdict: Verdict
    key_bit_sender: int | None
    key_bits_participants: tuple[int, ...] | None


@dataclass(frozen=True)
class PrivateTranscriptFile:
    n: int
    rounds: int
    security_D: int
    policy: AnnouncementPolicy
    seed: int
    fidelity: float
    label: str
    sender: int
    participants: tuple[int, ...]
    entries: tuple[PrivateRound, ...]
    counts: RoundCounts


def _fail(line_no: int, reason: str) -> TranscriptFormatError:
    return TranscriptFormatError(f"line {line_no}: {reason}")


def _parse_kv(line: str, line_no: int, keys: Sequence[str]) -> dict[str, str]:
    fields = line.split()
    if len(fields) != len(keys):
        raise _fail(line_no, f"expected fields {list(keys)}, got {fields}")
    out: dict[str, str] = {}
    for key, token in zip(keys, fields):
        prefix = key + "="
        if not token.startswith(prefix):
            raise _fail(line_no, f"expected {prefix}..., got {token!r}")
        out[key] = token[len(prefix):]
    return out


def _parse_int(text: str, line_no: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise _fail(line_no, f"{what} is not an integer: {text!r}") from None


def _parse_counts(line: str, line_no: int) -> RoundCounts:
    fields = line.split()
    if len(fields) != 4 or fields[0] != "counts":
        raise _fail(line_no, f"expected the counts trailer, got {line!r}")
    values = _parse_kv(" ".join(fields[1:]), line_no, ("keygen", "verification", "failed"))
    return RoundCounts(
        num_keygen=_parse_int(values["keygen"], line_no, "keygen count"),
        num_verification=_parse_int(values["verification"], line_no, "verification count"),
        num_verification_failed=_parse_int(values["failed"], line_no, "failed count"),
    )


def _check_counts(
    counts: RoundCounts, types: Iterable[RoundType], fails: int | None, line_no: int
) -> None:
    keygen = sum(1 for t in types if t is RoundType.KEYGEN)
    if counts.num_keygen != keygen:
        raise _fail(line_no, f"keygen count {counts.num_keygen} != {keygen} records")
    if fails is not None and counts.num_verification_failed != fails:
        raise _fail(
            line_no,
            f"failed count {counts.num_verification_failed} != {fails} fail verdicts",
        )


def read_public_transcript(path: str | Path) -> PublicTranscriptFile:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != PUBLIC_MAGIC:
        raise TranscriptFormatError(f"line 1: expected header {PUBLIC_MAGIC!r}")
    if len(lines) < 3:
        raise TranscriptFormatError("file truncated: missing summary or counts")
    summary = _parse_kv(lines[1], 2, ("n", "rounds", "security_D", "policy"))
    n = _parse_int(summary["n"], 2, "n")
    rounds = _parse_int(summary["rounds"], 2, "rounds")
    security_d = _parse_int(summary["security_D"], 2, "security_D")
    try:
        policy = AnnouncementPolicy(summary["policy"])
    except ValueError:
        raise _fail(2, f"unknown policy {summary['policy']!r}") from None

    entries: list[PublicRound] = []
    for offset, line in enumerate(lines[2:-1]):
        line_no = offset + 3
        fields = line.split()
        if len(fields) != 4:
            raise _fail(line_no, f"expected 4 fields, got {len(fields)}")
        index = _parse_int(fields[0], line_no, "round index")
        if index != offset:
            raise _fail(line_no, f"round index {index} out of sequence")
        try:
            round_type = RoundType(fields[1])
        except ValueError:
            raise _fail(line_no, f"unknown round type {fields[1]!r}") from None
        try:
            ext = None if fields[2] == "-" else unpack_bits(fields[2], n)
            ver = None if fields[3] == "-" else unpack_bits(fields[3], 2 * n)
        except ValueError as exc:
            raise _fail(line_no, str(exc)) from None
        if round_type is RoundType.VERIFICATION and (ext is None or ver is None):
            raise _fail(line_no, "verification rounds must carry both boards")
        if round_type is RoundType.KEYGEN and ver is not None:
            raise _fail(line_no, "keygen rounds carry no verification board")
        entries.append(PublicRound(index, round_type, ext, ver))
    if len(entries) != rounds:
        raise TranscriptFormatError(
            f"line 2: header declares {rounds} rounds, file has {len(entries)}"
        )
    counts = _parse_counts(lines[-1], len(lines))
    _check_counts(counts, (e.round_type for e in entries), None, len(lines))
    if counts.num_keygen + counts.num_verification != rounds:
        raise _fail(len(lines), "counts do not sum to the number of rounds")
    return PublicTranscriptFile(
        n=n,
        rounds=rounds,
        security_D=security_d,
        policy=policy,
        entries=tuple(entries),
        counts=counts,
    )


def read_private_transcript(path: str | Path) -> PrivateTranscriptFile:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != PRIVATE_MAGIC:
        raise TranscriptFormatError(f"line 1: expected header {PRIVATE_MAGIC!r}")
    if len(lines) < 4:
        raise TranscriptFormatError("file truncated: missing headers or counts")
    summary = _parse_kv(
        lines[1], 2, ("n", "rounds", "security_D", "policy", "seed", "fidelity", "label")
    )
    n = _parse_int(summary["n"], 2, "n")
    rounds = _parse_int(summary["rounds"], 2, "rounds")
    security_d = _parse_int(summary["security_D"], 2, "security_D")
    try:
        policy = AnnouncementPolicy(summary["policy"])
    except ValueError:
        raise _fail(2, f"unknown policy {summary['policy']!r}") from None
    seed = _parse_int(summary["seed"], 2, "seed")
    try:
        fidelity = float(summary["fidelity"])
    except ValueError:
        raise _fail(2, f"fidelity is not a number: {summary['fidelity']!r}") from None
    label = summary["label"]

    roles = _parse_kv(lines[2], 3, ("sender", "participants"))
    sender = _parse_int(roles["sender"], 3, "sender")
    participants = tuple(
        _parse_int(tok, 3, "participant") for tok in roles["participants"].split(",")
    )

    entries: list[PrivateRound] = []
    for offset, line in enumerate(lines[3:-1]):
        line_no = offset + 4
        fields = line.split()
        if len(fields) != 8:
            raise _fail(line_no, f"expected 8 fields, got {len(fields)}")
        index = _parse_int(fields[0], line_no, "round index")
        if index != offset:
            raise _fail(line_no, f"round index {index} out of sequence")
        try:
            round_type = RoundType(fields[1])
        except ValueError:
            raise _fail(line_no, f"unknown round type {fields[1]!r}") from None
        delta = None if fields[2] == "-" else _parse_int(fields[2], line_no, "delta")
        if fields[3] == "-":
            basis = None
        else:
            try:
                basis = PauliBasis(fields[3])
            except ValueError:
                raise _fail(line_no, f"unknown basis {fields[3]!r}") from None
        outcome = None if fields[4] == "-" else _parse_int(fields[4], line_no, "outcome")
        try:
            verdict = Verdict(fields[5])
        except ValueError:
            raise _fail(line_no, f"unknown verdict {fields[5]!r}") from None
        if (verdict is not Verdict.NA) != (round_type is RoundType.VERIFICATION):
            raise _fail(line_no, "verdict must be set exactly for verification rounds")
        if fields[6] == "-":
            key_s = None
            key_p = None
            if fields[7] != "-":
                raise _fail(line_no, "participant key bits without a sender key bit")
        else:
            key_s = _parse_int(fields[6], line_no, "sender key bit")
            try:
                key_p = unpack_bits(fields[7], len(participants))
            except ValueError as exc:
                raise _fail(line_no, str(exc)) from None
        if (key_s is not None) != (round_type is RoundType.KEYGEN):
            raise _fail(line_no, "key bits must be present exactly for keygen rounds")
        entries.append(
            PrivateRound(index, round_type, delta, basis, outcome, verdict, key_s, key_p)
        )
    if len(entries) != rounds:
        raise TranscriptFormatError(
            f"line 2: header declares {rounds} rounds, file has {len(entries)}"
        )
    counts = _parse_counts(lines[-1], len(lines))
    fails = sum(1 for e in entries if e.verdict is Verdict.FAIL)
    _check_counts(counts, (e.round_type for e in entries), fails, len(lines))
    return PrivateTranscriptFile(
        n=n,
        rounds=rounds,
        security_D=security_d,
        policy=policy,
        seed=seed,
        fidelity=fidelity,
        label=label,
        sender=sender,
        participants=participants,
        entries=tuple(entries),
        counts=counts,
    )


def check_consistency(
    public: PublicTranscriptFile, private: PrivateTranscriptFile
) -> None:
    """Cross-validate the two files of one run."""
    for name in ("n", "rounds", "security_D", "policy"):
        if getattr(public, name) != getattr(private, name):
            raise TranscriptFormatError(
                f"files disagree on {name}: "
                f"{getattr(public, name)} vs {getattr(private, name)}"
            )
    if public.counts != private.counts:
        raise TranscriptFormatError(
            f"files disagree on counts: {public.counts} vs {private.counts}"
        )
    for pub, priv in zip(public.entries, private.entries):
        if pub.round_type is not priv.round_type:
            raise TranscriptFormatError(
                f"round {pub.index}: files disagree on the round type"
            )
