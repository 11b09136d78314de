"""Security experiments and scripted adversaries."""

from .adversaries import anonymity_battery, constraint_violators, non_frameability_battery
from .games import (
    BOTTOM,
    AnonymityGame,
    GameState,
    NonFrameabilityGame,
    TrialStats,
    run_anonymity,
    run_non_frameability,
    run_trials,
)

__all__ = [
    "BOTTOM",
    "AnonymityGame",
    "GameState",
    "NonFrameabilityGame",
    "TrialStats",
    "anonymity_battery",
    "constraint_violators",
    "non_frameability_battery",
    "run_anonymity",
    "run_non_frameability",
    "run_trials",
]
