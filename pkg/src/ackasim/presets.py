"""The six four-party network configurations of the demonstration.

Four three-partite patterns (a sender with two participants) and two
bipartite ones (a sender with one participant).  The label-to-role table is
a canonical choice covering the distinct role patterns; what matters for
every statistic in this package is only the participant count and which
parties stay outside the group.
"""

from __future__ import annotations

from dataclasses import dataclass

from .noise import AdversaryStrategy, NoiseModel
from .protocol import NetworkConfig
from .records import AnnouncementPolicy


@dataclass(frozen=True)
class ConfigurationPreset:
    label: str
    n: int
    sender: int
    participants: tuple[int, ...]

    @property
    def num_participants(self) -> int:
        return len(self.participants)


PRESETS: dict[str, ConfigurationPreset] = {
    "A": ConfigurationPreset("A", n=4, sender=0, participants=(1, 2)),
    "B": ConfigurationPreset("B", n=4, sender=0, participants=(1, 3)),
    "C": ConfigurationPreset("C", n=4, sender=0, participants=(2, 3)),
    "D": ConfigurationPreset("D", n=4, sender=1, participants=(2, 3)),
    "E": ConfigurationPreset("E", n=4, sender=0, participants=(1,)),
    "F": ConfigurationPreset("F", n=4, sender=2, participants=(3,)),
}

PRESET_LABELS = tuple(PRESETS)


def preset_config(
    label: str,
    *,
    D: int = 20,
    L: int = 10_000,
    fidelity: float = 1.0,
    seed: int = 0,
    policy: AnnouncementPolicy = AnnouncementPolicy.VERIFICATION_ONLY,
    adversaries: dict[int, AdversaryStrategy] | None = None,
) -> NetworkConfig:
    """Build a run configuration from a preset label."""
    try:
        preset = PRESETS[label]
    except KeyError:
        raise ValueError(
            f"unknown preset {label!r}; choose one of {', '.join(PRESETS)}"
        ) from None
    return NetworkConfig(
        n=preset.n,
        sender=preset.sender,
        participants=preset.participants,
        D=D,
        L=L,
        noise=NoiseModel.from_fidelity(fidelity),
        adversaries=adversaries or {},
        announcement_policy=policy,
        seed=seed,
    )
