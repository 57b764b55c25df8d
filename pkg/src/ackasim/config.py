"""Run-configuration files: a flat key = value grammar.

Example::

    # three-partite run with white noise
    preset = A
    D = 20
    L = 10000
    noise.F_target = 0.85
    seed = 7
    output_dir = out

``preset`` fills n/sender/participants, which explicit keys may override.
Unknown keys are rejected by name so typos cannot silently fall back to a
default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .noise import AdversaryKind, AdversaryStrategy, NoiseModel
from .presets import PRESETS
from .protocol import NetworkConfig
from .records import AnnouncementPolicy

KNOWN_KEYS = (
    "preset",
    "n",
    "sender",
    "participants",
    "D",
    "L",
    "noise.F_target",
    "adversary.party",
    "adversary.kind",
    "adversary.p_guess",
    "announcement_policy",
    "seed",
    "output_dir",
)

DEFAULT_OUTPUT_DIR = "out"


class ConfigError(ValueError):
    """Bad run configuration; the message names the key (and line, if any)."""


def parse_run_config(path: str | Path) -> "RunSettings":
    return parse_run_config_text(Path(path).read_text(), source=str(path))


@dataclass(frozen=True)
class RunSettings:
    config: NetworkConfig
    label: str
    output_dir: str


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    values: dict[str, tuple[str, int]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {line_no}: key {key!r} has no value")
        values[key] = (value, line_no)
    return values


def _take_int(values, key) -> int | None:
    if key not in values:
        return None
    text, line_no = values[key]
    try:
        return int(text)
    except ValueError:
        raise ConfigError(
            f"line {line_no}: key {key!r} expects an integer, got {text!r}"
        ) from None


def _take_float(values, key) -> float | None:
    if key not in values:
        return None
    text, line_no = values[key]
    try:
        return float(text)
    except ValueError:
        raise ConfigError(
            f"line {line_no}: key {key!r} expects a number, got {text!r}"
        ) from None


def _take_participants(values) -> tuple[int, ...] | None:
    if "participants" not in values:
        return None
    text, line_no = values["participants"]
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(
            f"line {line_no}: key 'participants' expects comma-separated "
            f"integers, got {text!r}"
        ) from None


def _take_adversaries(values) -> dict[int, AdversaryStrategy]:
    keys_present = [k for k in ("adversary.party", "adversary.kind") if k in values]
    if not keys_present and "adversary.p_guess" not in values:
        return {}
    if len(keys_present) != 2:
        some, line_no = values[keys_present[0] if keys_present else "adversary.p_guess"]
        raise ConfigError(
            f"line {line_no}: adversary.party and adversary.kind must be given together"
        )
    party = _take_int(values, "adversary.party")
    kind_text, kind_line = values["adversary.kind"]
    try:
        kind = AdversaryKind(kind_text)
    except ValueError:
        raise ConfigError(
            f"line {kind_line}: unknown adversary kind {kind_text!r} "
            f"(choose from {', '.join(k.value for k in AdversaryKind)})"
        ) from None
    p_guess = _take_float(values, "adversary.p_guess")
    if kind is AdversaryKind.GUESS_KEYGEN:
        if p_guess is None:
            raise ConfigError(
                f"line {kind_line}: guess_keygen requires adversary.p_guess"
            )
        strategy = AdversaryStrategy.guess_keygen(p_guess)
    else:
        if p_guess is not None:
            _, line_no = values["adversary.p_guess"]
            raise ConfigError(
                f"line {line_no}: adversary.p_guess only applies to guess_keygen"
            )
        strategy = AdversaryStrategy(kind)
    return {party: strategy}


def parse_run_config_text(text: str, source: str = "<config>") -> RunSettings:
    values = _parse_lines(text)

    label = "custom"
    n = sender = None
    participants = None
    if "preset" in values:
        preset_text, line_no = values["preset"]
        if preset_text not in PRESETS:
            raise ConfigError(
                f"line {line_no}: unknown preset {preset_text!r} "
                f"(choose from {', '.join(PRESETS)})"
            )
        preset = PRESETS[preset_text]
        label = preset.label
        n, sender, participants = preset.n, preset.sender, preset.participants

    n = _take_int(values, "n") if "n" in values else n
    sender = _take_int(values, "sender") if "sender" in values else sender
    explicit_participants = _take_participants(values)
    if explicit_participants is not None:
        participants = explicit_participants
    if n is None or sender is None or participants is None:
        raise ConfigError(
            "n, sender, and participants are required (directly or via preset)"
        )

    d = _take_int(values, "D")
    rounds = _take_int(values, "L")
    f_target = _take_float(values, "noise.F_target")
    seed = _take_int(values, "seed")

    policy = AnnouncementPolicy.VERIFICATION_ONLY
    if "announcement_policy" in values:
        policy_text, line_no = values["announcement_policy"]
        try:
            policy = AnnouncementPolicy(policy_text)
        except ValueError:
            raise ConfigError(
                f"line {line_no}: unknown announcement_policy {policy_text!r} "
                f"(choose from {', '.join(p.value for p in AnnouncementPolicy)})"
            ) from None

    adversaries = _take_adversaries(values)
    output_dir = values.get("output_dir", (DEFAULT_OUTPUT_DIR, 0))[0]

    try:
        noise = NoiseModel.from_fidelity(1.0 if f_target is None else f_target)
        config = NetworkConfig(
            n=n,
            sender=sender,
            participants=participants,
            D=20 if d is None else d,
            L=10_000 if rounds is None else rounds,
            noise=noise,
            adversaries=adversaries,
            announcement_policy=policy,
            seed=0 if seed is None else seed,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return RunSettings(config=config, label=label, output_dir=output_dir)
