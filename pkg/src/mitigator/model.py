"""Quantitative confusion state model.

A user's confusion is a level in [0, 1]. Two thresholds split the range into
three zones: below ``t_a`` the user is engaged, between the thresholds the
confusion is productive (the user is motivated to resolve it themselves),
above ``t_b`` it is unproductive and deteriorates if it persists. Alongside
the zone we track a coarse affect state on the chain
Engagement - Confusion - Frustration - Boredom - Disengaged; transitions only
ever move one step along the chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ConfusionZone(Enum):
    ENGAGED = "engaged"
    PRODUCTIVE_CONFUSION = "productive_confusion"
    UNPRODUCTIVE_CONFUSION = "unproductive_confusion"


# Order matters: lower rank = less confused. Used by the engine's
# "did the zone improve" test.
ZONE_RANK = {
    ConfusionZone.ENGAGED: 0,
    ConfusionZone.PRODUCTIVE_CONFUSION: 1,
    ConfusionZone.UNPRODUCTIVE_CONFUSION: 2,
}


class AffectState(Enum):
    ENGAGEMENT = "engagement"
    CONFUSION = "confusion"
    FRUSTRATION = "frustration"
    BOREDOM = "boredom"
    DISENGAGED = "disengaged"


AFFECT_CHAIN = [
    AffectState.ENGAGEMENT,
    AffectState.CONFUSION,
    AffectState.FRUSTRATION,
    AffectState.BOREDOM,
    AffectState.DISENGAGED,
]


class InductionType(Enum):
    COMPLEX_INFORMATION = "complex_information"
    CONTRADICTORY_INFORMATION = "contradictory_information"
    INSUFFICIENT_INFORMATION = "insufficient_information"
    FALSE_FEEDBACK = "false_feedback"


@dataclass(frozen=True)
class ConfusionLevel:
    """Dimensionless confusion intensity in [0, 1]."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"confusion level must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class Thresholds:
    t_a: float = 0.30
    t_b: float = 0.70

    def __post_init__(self):
        if not 0.0 < self.t_a < self.t_b < 1.0:
            raise ValueError(
                f"thresholds must satisfy 0 < t_a < t_b < 1, got t_a={self.t_a}, t_b={self.t_b}"
            )


@dataclass(frozen=True)
class PersistenceLimits:
    """Consecutive unproductive-zone turns before the affect deteriorates."""

    frustration_after: int = 2
    boredom_after: int = 4
    disengage_after: int = 6

    def __post_init__(self):
        if not 0 < self.frustration_after <= self.boredom_after <= self.disengage_after:
            raise ValueError(
                "persistence limits must be positive and non-decreasing: "
                f"{self.frustration_after}, {self.boredom_after}, {self.disengage_after}"
            )


@dataclass(frozen=True)
class ConfusionAssessment:
    """Per-turn picture of the user: level plus derived zone and affect."""

    level: ConfusionLevel
    zone: ConfusionZone
    affect: AffectState
    persistence_turns: int = 0

    def __post_init__(self):
        if self.persistence_turns < 0:
            raise ValueError("persistence_turns must be non-negative")


def classify_zone(level: ConfusionLevel, thresholds: Thresholds) -> ConfusionZone:
    """Map a confusion level to its zone.

    Boundary convention: level == t_a and level == t_b both count as
    productive confusion (the strict comparisons sit on the outer zones).
    """
    v = level.value
    if v < thresholds.t_a:
        return ConfusionZone.ENGAGED
    if v <= thresholds.t_b:
        return ConfusionZone.PRODUCTIVE_CONFUSION
    return ConfusionZone.UNPRODUCTIVE_CONFUSION


def zone_rank(zone: ConfusionZone) -> int:
    return ZONE_RANK[zone]


def step_affect(
    current: AffectState,
    zone: ConfusionZone,
    persistence_turns: int,
    limits: PersistenceLimits,
) -> AffectState:
    """Advance the affect state by at most one chain step.

    An engaged zone pulls any non-terminal state one step back toward
    Engagement. A confused zone pushes Engagement to Confusion. Persistent
    unproductive confusion pushes further down the chain once the configured
    turn counts are reached. Disengaged is absorbing.
    """
    if persistence_turns < 0:
        raise ValueError("persistence_turns must be non-negative")
    if current is AffectState.DISENGAGED:
        return AffectState.DISENGAGED

    if zone is ConfusionZone.ENGAGED:
        idx = AFFECT_CHAIN.index(current)
        return AFFECT_CHAIN[max(idx - 1, 0)]

    if current is AffectState.ENGAGEMENT:
        return AffectState.CONFUSION

    if zone is ConfusionZone.UNPRODUCTIVE_CONFUSION:
        if current is AffectState.CONFUSION and persistence_turns >= limits.frustration_after:
            return AffectState.FRUSTRATION
        if current is AffectState.FRUSTRATION and persistence_turns >= limits.boredom_after:
            return AffectState.BOREDOM
        if current is AffectState.BOREDOM and persistence_turns >= limits.disengage_after:
            return AffectState.DISENGAGED

    return current


def is_mitigated(assessment: ConfusionAssessment) -> bool:
    """True once the user is back in the engaged zone."""
    return assessment.zone is ConfusionZone.ENGAGED
