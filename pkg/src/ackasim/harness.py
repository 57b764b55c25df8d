"""Run orchestration: summaries, transcript analysis, and parameter sweeps.

Every run produces four files (public transcript, sender-private file, and
a summary as both text and CSV).  ``analyze_transcripts`` rebuilds the same
summary from the files alone, which doubles as an integrity check on the
formats.  Sweeps fan runs out over (preset, fidelity, repetition) cells
with independently derived seeds; cells may execute in parallel and the
output is sorted by cell key, so the artifacts do not depend on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import oracles
from .config import RunSettings
from .presets import PRESETS, preset_config
from .protocol import NetworkConfig, ProtocolResult, run_protocol
from .records import AnnouncementPolicy, RoundType
from .security import (
    CSV_HEADER as SECURITY_CSV_HEADER,
    SecurityInputs,
    SecurityReport,
    build_report,
    report_csv_row,
    report_text,
)
from .transcripts import (
    PrivateTranscriptFile,
    PublicTranscriptFile,
    check_consistency,
    read_private_transcript,
    read_public_transcript,
    write_private_transcript,
    write_public_transcript,
)

# Measured four-photon demonstration rates (colored noise).  The white-noise
# model is not expected to reproduce them; summaries print them next to the
# model's own prediction for comparison.
REFERENCE_KEYGEN_RATE = 0.953
REFERENCE_VERIFICATION_RATE = 0.893

PUBLIC_TRANSCRIPT_NAME = "transcript_public.txt"
PRIVATE_TRANSCRIPT_NAME = "sender_private.txt"
SUMMARY_TEXT_NAME = "summary.txt"
SUMMARY_CSV_NAME = "summary.csv"

RUN_CSV_HEADER = (
    "label,n,m,sender,participants,D,L,fidelity,seed,policy,rounds,keygen,"
    "verification,failed,keygen_agreement,pass_rate,predicted_agreement,"
    "predicted_pass_rate," + SECURITY_CSV_HEADER
)

SWEEP_ROWS_CSV_HEADER = (
    "preset,fidelity,repetition,seed,rounds,keygen,verification,failed,"
    "keygen_agreement,pass_rate,predicted_agreement,predicted_pass_rate"
)
SWEEP_CELLS_CSV_HEADER = (
    "preset,fidelity,repetitions,keygen_agreement_mean,keygen_agreement_std,"
    "pass_rate_mean,pass_rate_std,predicted_agreement,predicted_pass_rate"
)


@dataclass(frozen=True)
class RunSummary:
    """Everything the run/analyze front ends report about one run."""

    label: str | None
    n: int
    num_participants: int | None
    sender: int | None
    participants: tuple[int, ...] | None
    security_D: int
    rounds: int
    fidelity: float | None
    seed: int | None
    policy: AnnouncementPolicy
    num_keygen: int
    num_verification: int
    num_failed: int
    keygen_agreement: float | None
    pass_rate: float | None
    predicted_agreement: float | None
    predicted_pass_rate: float | None
    security: SecurityReport | None


def _agreement(rows: Iterable[tuple[int, tuple[int, ...]]]) -> float | None:
    total = agree = 0
    for sender_bit, participant_bits in rows:
        total += 1
        if all(b == sender_bit for b in participant_bits):
            agree += 1
    return None if total == 0 else agree / total


def _pass_rate(num_verification: int, num_failed: int) -> float | None:
    if num_verification == 0:
        return None
    return 1.0 - num_failed / num_verification


def _security(
    num_keygen: int, num_verification: int, num_failed: int, fidelity: float
) -> SecurityReport | None:
    if num_keygen < 1 or num_verification < 1:
        return None
    return build_report(
        SecurityInputs(
            num_keygen=num_keygen,
            num_verification=num_verification,
            num_verification_failed=num_failed,
            fidelity_F=fidelity,
        )
    )


def summarize_run(result: ProtocolResult, label: str) -> RunSummary:
    config = result.config
    counts = result.transcript.counts
    fidelity = config.noise.F_target
    key_rows = [
        (
            result.sender_key[i],
            tuple(result.participant_keys[p][i] for p in config.participants),
        )
        for i in range(len(result.sender_key))
    ]
    return RunSummary(
        label=label,
        n=config.n,
        num_participants=config.num_participants,
        sender=config.sender,
        participants=config.participants,
        security_D=config.D,
        rounds=config.L,
        fidelity=fidelity,
        seed=config.seed,
        policy=config.announcement_policy,
        num_keygen=counts.num_keygen,
        num_verification=counts.num_verification,
        num_failed=counts.num_verification_failed,
        keygen_agreement=_agreement(key_rows),
        pass_rate=_pass_rate(counts.num_verification, counts.num_verification_failed),
        predicted_agreement=oracles.predicted_keygen_agreement(
            config.n, config.sender, config.participants, fidelity
        ),
        predicted_pass_rate=oracles.predicted_verification_pass_rate(
            config.n, config.sender, config.participants, fidelity
        ),
        security=_security(
            counts.num_keygen,
            counts.num_verification,
            counts.num_verification_failed,
            fidelity,
        ),
    )


def summarize_files(
    public: PublicTranscriptFile,
    private: PrivateTranscriptFile | None,
    fidelity_override: float | None = None,
) -> RunSummary:
    """Rebuild a run summary from transcript files.

    With only the public file, role-dependent figures are unavailable and
    the security report conservatively assumes a perfect state (fidelity 1,
    no noise correction) unless an override is given.
    """
    counts = public.counts
    if private is None:
        fidelity = 1.0 if fidelity_override is None else fidelity_override
        return RunSummary(
            label=None,
            n=public.n,
            num_participants=None,
            sender=None,
            participants=None,
            security_D=public.security_D,
            rounds=public.rounds,
            fidelity=fidelity_override,
            seed=None,
            policy=public.policy,
            num_keygen=counts.num_keygen,
            num_verification=counts.num_verification,
            num_failed=counts.num_verification_failed,
            keygen_agreement=None,
            pass_rate=_pass_rate(
                counts.num_verification, counts.num_verification_failed
            ),
            predicted_agreement=None,
            predicted_pass_rate=None,
            security=_security(
                counts.num_keygen,
                counts.num_verification,
                counts.num_verification_failed,
                fidelity,
            ),
        )

    check_consistency(public, private)
    fidelity = private.fidelity if fidelity_override is None else fidelity_override
    key_rows = [
        (entry.key_bit_sender, entry.key_bits_participants)
        for entry in private.entries
        if entry.round_type is RoundType.KEYGEN
    ]
    return RunSummary(
        label=private.label,
        n=private.n,
        num_participants=len(private.participants),
        sender=private.sender,
        participants=private.participants,
        security_D=private.security_D,
        rounds=private.rounds,
        fidelity=fidelity,
        seed=private.seed,
        policy=private.policy,
        num_keygen=counts.num_keygen,
        num_verification=counts.num_verification,
        num_failed=counts.num_verification_failed,
        keygen_agreement=_agreement(key_rows),
        pass_rate=_pass_rate(counts.num_verification, counts.num_verification_failed),
        predicted_agreement=oracles.predicted_keygen_agreement(
            private.n, private.sender, private.participants, fidelity
        ),
        predicted_pass_rate=oracles.predicted_verification_pass_rate(
            private.n, private.sender, private.participants, fidelity
        ),
        security=_security(
            counts.num_keygen,
            counts.num_verification,
            counts.num_verification_failed,
            fidelity,
        ),
    )


def _fmt(value: float | None, unavailable: str = "unavailable") -> str:
    return unavailable if value is None else f"{value:.6f}"


def render_summary_text(summary: RunSummary) -> str:
    label = "-" if summary.label is None else summary.label
    if summary.participants is None:
        roles = "roles=private"
    else:
        roles = (
            f"m={summary.num_participants} sender={summary.sender} "
            f"participants=" + ",".join(str(p) for p in summary.participants)
        )
    fidelity = "-" if summary.fidelity is None else repr(summary.fidelity)
    seed = "-" if summary.seed is None else str(summary.seed)
    lines = [
        f"run summary (label={label})",
        f"network: n={summary.n} {roles}",
        f"settings: D={summary.security_D} L={summary.rounds} fidelity={fidelity} "
        f"seed={seed} policy={summary.policy.value}",
        f"rounds: keygen={summary.num_keygen} "
        f"verification={summary.num_verification} failed={summary.num_failed}",
        f"keygen_agreement: {_fmt(summary.keygen_agreement)} "
        f"(white-noise prediction {_fmt(summary.predicted_agreement)})",
        f"verification_pass_rate: {_fmt(summary.pass_rate)} "
        f"(white-noise prediction {_fmt(summary.predicted_pass_rate)})",
        f"reference four-photon rates under colored noise (not modeled): "
        f"keygen {REFERENCE_KEYGEN_RATE}, verification {REFERENCE_VERIFICATION_RATE}",
    ]
    if summary.security is None:
        lines.append("security: unavailable (degenerate round counts)")
    else:
        lines.append("security:")
        lines.append(report_text(summary.security))
    return "\n".join(lines) + "\n"


def summary_csv(summary: RunSummary) -> str:
    cells = [
        "" if summary.label is None else summary.label,
        str(summary.n),
        "" if summary.num_participants is None else str(summary.num_participants),
        "" if summary.sender is None else str(summary.sender),
        ""
        if summary.participants is None
        else ";".join(str(p) for p in summary.participants),
        str(summary.security_D),
        str(summary.rounds),
        "" if summary.fidelity is None else repr(summary.fidelity),
        "" if summary.seed is None else str(summary.seed),
        summary.policy.value,
        str(summary.rounds),
        str(summary.num_keygen),
        str(summary.num_verification),
        str(summary.num_failed),
        "" if summary.keygen_agreement is None else f"{summary.keygen_agreement:.6f}",
        "" if summary.pass_rate is None else f"{summary.pass_rate:.6f}",
        ""
        if summary.predicted_agreement is None
        else f"{summary.predicted_agreement:.6f}",
        ""
        if summary.predicted_pass_rate is None
        else f"{summary.predicted_pass_rate:.6f}",
    ]
    security = (
        report_csv_row(summary.security)
        if summary.security is not None
        else "," * (SECURITY_CSV_HEADER.count(",") )
    )
    return RUN_CSV_HEADER + "\n" + ",".join(cells) + "," + security + "\n"


def run_and_write(settings: RunSettings, output_dir: str | Path) -> dict[str, Path]:
    """Execute a configured run and persist all four artifacts."""
    result = run_protocol(settings.config)
    summary = summarize_run(result, settings.label)
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "public": outdir / PUBLIC_TRANSCRIPT_NAME,
        "private": outdir / PRIVATE_TRANSCRIPT_NAME,
        "summary_text": outdir / SUMMARY_TEXT_NAME,
        "summary_csv": outdir / SUMMARY_CSV_NAME,
    }
    write_public_transcript(paths["public"], result.transcript)
    write_private_transcript(paths["private"], result, settings.label)
    paths["summary_text"].write_text(render_summary_text(summary))
    paths["summary_csv"].write_text(summary_csv(summary))
    return paths


def analyze_transcripts(
    public_path: str | Path,
    private_path: str | Path | None = None,
    fidelity_override: float | None = None,
) -> RunSummary:
    """Recompute a run summary from persisted transcripts."""
    public = read_public_transcript(public_path)
    private = None if private_path is None else read_private_transcript(private_path)
    return summarize_files(public, private, fidelity_override)


@dataclass(frozen=True)
class SweepRow:
    preset: str
    fidelity: float
    repetition: int
    seed: int
    rounds: int
    num_keygen: int
    num_verification: int
    num_failed: int
    keygen_agreement: float | None
    pass_rate: float | None
    predicted_agreement: float
    predicted_pass_rate: float


@dataclass(frozen=True)
class SweepCell:
    preset: str
    fidelity: float
    repetitions: int
    agreement_mean: float
    agreement_std: float
    pass_rate_mean: float
    pass_rate_std: float
    predicted_agreement: float
    predicted_pass_rate: float


_SWEEP_TAG = 7


def _derive_seed(base_seed: int, *tags: int) -> int:
    seq = np.random.SeedSequence([base_seed, _SWEEP_TAG, *tags])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _sweep_task(args: tuple[str, float, int, int, int, int]) -> SweepRow:
    label, fidelity, repetition, seed, d, rounds = args
    config = preset_config(label, D=d, L=rounds, fidelity=fidelity, seed=seed)
    result = run_protocol(config)
    summary = summarize_run(result, label)
    return SweepRow(
        preset=label,
        fidelity=fidelity,
        repetition=repetition,
        seed=seed,
        rounds=rounds,
        num_keygen=summary.num_keygen,
        num_verification=summary.num_verification,
        num_failed=summary.num_failed,
        keygen_agreement=summary.keygen_agreement,
        pass_rate=summary.pass_rate,
        predicted_agreement=summary.predicted_agreement,
        predicted_pass_rate=summary.predicted_pass_rate,
    )


def sweep(
    presets: Sequence[str],
    fidelities: Sequence[float],
    repetitions: int,
    *,
    base_seed: int = 0,
    D: int = 20,
    L: int = 10_000,
    jobs: int = 1,
) -> tuple[list[SweepRow], list[SweepCell]]:
    """One run per (preset, fidelity, repetition); aggregated per cell.

    Seeds derive from (base_seed, preset, fidelity, repetition), so results
    do not depend on the number of workers or on completion order.
    """
    if not presets or not fidelities or repetitions < 1:
        raise ValueError("sweep needs presets, fidelities, and repetitions >= 1")
    for label in presets:
        if label not in PRESETS:
            raise ValueError(f"unknown preset {label!r}")
    tasks = [
        (label, fidelity, rep, _derive_seed(base_seed, pi, fi, rep), D, L)
        for pi, label in enumerate(presets)
        for fi, fidelity in enumerate(fidelities)
        for rep in range(repetitions)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(task) for task in tasks]
    order = {label: i for i, label in enumerate(presets)}
    fid_order = {fid: i for i, fid in enumerate(fidelities)}
    rows.sort(key=lambda r: (order[r.preset], fid_order[r.fidelity], r.repetition))

    cells = []
    for label in presets:
        for fidelity in fidelities:
            group = [r for r in rows if r.preset == label and r.fidelity == fidelity]
            agreements = [r.keygen_agreement for r in group if r.keygen_agreement is not None]
            passes = [r.pass_rate for r in group if r.pass_rate is not None]
            cells.append(
                SweepCell(
                    preset=label,
                    fidelity=fidelity,
                    repetitions=len(group),
                    agreement_mean=float(np.mean(agreements)),
                    agreement_std=_spread(agreements),
                    pass_rate_mean=float(np.mean(passes)),
                    pass_rate_std=_spread(passes),
                    predicted_agreement=group[0].predicted_agreement,
                    predicted_pass_rate=group[0].predicted_pass_rate,
                )
            )
    return rows, cells


def _spread(values: Sequence[float]) -> float:
    """Sample standard deviation over repetitions; 0 for a single run."""
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def sweep_rows_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_ROWS_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.preset},{r.fidelity!r},{r.repetition},{r.seed},{r.rounds},"
            f"{r.num_keygen},{r.num_verification},{r.num_failed},"
            f"{'' if r.keygen_agreement is None else f'{r.keygen_agreement:.6f}'},"
            f"{'' if r.pass_rate is None else f'{r.pass_rate:.6f}'},"
            f"{r.predicted_agreement:.6f},{r.predicted_pass_rate:.6f}"
        )
    return "\n".join(lines) + "\n"


def sweep_cells_csv(cells: Sequence[SweepCell]) -> str:
    lines = [SWEEP_CELLS_CSV_HEADER]
    for c in cells:
        lines.append(
            f"{c.preset},{c.fidelity!r},{c.repetitions},"
            f"{c.agreement_mean:.6f},{c.agreement_std:.6f},"
            f"{c.pass_rate_mean:.6f},{c.pass_rate_std:.6f},"
            f"{c.predicted_agreement:.6f},{c.predicted_pass_rate:.6f}"
        )
    return "\n".join(lines) + "\n"


def sweep_text(cells: Sequence[SweepCell]) -> str:
    header = (
        f"{'preset':<7}{'fidelity':<10}{'reps':<6}"
        f"{'agreement':<26}{'pass_rate':<26}{'pred_agree':<12}{'pred_pass':<12}"
    )
    lines = [header]
    for c in cells:
        lines.append(
            f"{c.preset:<7}{c.fidelity!r:<10}{c.repetitions:<6}"
            f"{f'{c.agreement_mean:.6f} +/- {c.agreement_std:.6f}':<26}"
            f"{f'{c.pass_rate_mean:.6f} +/- {c.pass_rate_std:.6f}':<26}"
            f"{c.predicted_agreement:<12.6f}{c.predicted_pass_rate:<12.6f}"
        )
    return "\n".join(lines) + "\n"


def write_sweep_outputs(
    output_dir: str | Path, rows: Sequence[SweepRow], cells: Sequence[SweepCell]
) -> dict[str, Path]:
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "rows_csv": outdir / "sweep_rows.csv",
        "cells_csv": outdir / "sweep_cells.csv",
        "text": outdir / "sweep.txt",
    }
    paths["rows_csv"].write_text(sweep_rows_csv(rows))
    paths["cells_csv"].write_text(sweep_cells_csv(cells))
    paths["text"].write_text(sweep_text(cells))
    return paths
