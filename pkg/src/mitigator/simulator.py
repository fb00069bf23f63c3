"""Seeded stochastic user whose confusion level reacts to mitigation acts.

The dynamics are deliberately simple evaluation scaffolding: each act type
has, per induction type, a Gaussian effect on the level; unattended turns
drift upward. An independent per-turn noise term (``noise_sd``) is folded
into every update, so an act update has standard deviation
sqrt(sd^2 + noise_sd^2) and a drift turn has noise_sd alone. Post-update
levels are clamped to [0, 1]. All numbers live in ``SimUserParams`` and are
serializable; nothing here is an empirical claim.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .acts import DialogueAct, DialogueActType
from .engine import Observation, ObservationSource
from .model import ConfusionLevel, InductionType


class TurnLimitExceeded(Exception):
    pass


@dataclass(frozen=True)
class EffectDist:
    mean_delta: float  # negative = confusion-reducing
    sd: float = 0.0

    def __post_init__(self):
        if self.sd < 0:
            raise ValueError("sd must be non-negative")


@dataclass
class SimUserParams:
    initial_level: Dict[InductionType, float]
    effect: Dict[Tuple[DialogueActType, InductionType], EffectDist]
    drift: float = 0.05
    noise_sd: float = 0.0

    def __post_init__(self):
        for induction in InductionType:
            if induction not in self.initial_level:
                raise ValueError(f"initial_level missing induction: {induction.value}")
            v = self.initial_level[induction]
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"initial level for {induction.value} outside [0, 1]: {v}")
        for act in DialogueActType:
            for induction in InductionType:
                if (act, induction) not in self.effect:
                    raise ValueError(
                        f"effect table missing pair: ({act.value}, {induction.value})"
                    )
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "initial_level": {k.value: v for k, v in self.initial_level.items()},
            "effect": {
                act.value: {
                    induction.value: {
                        "mean_delta": self.effect[(act, induction)].mean_delta,
                        "sd": self.effect[(act, induction)].sd,
                    }
                    for induction in InductionType
                }
                for act in DialogueActType
            },
            "drift": self.drift,
            "noise_sd": self.noise_sd,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimUserParams":
        return cls(
            initial_level={
                InductionType(k): float(v) for k, v in data["initial_level"].items()
            },
            effect={
                (DialogueActType(a), InductionType(i)): EffectDist(
                    float(cell["mean_delta"]), float(cell.get("sd", 0.0))
                )
                for a, by_induction in data["effect"].items()
                for i, cell in by_induction.items()
            },
            drift=float(data.get("drift", 0.0)),
            noise_sd=float(data.get("noise_sd", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimUserParams":
        return cls.from_dict(json.loads(text))


# The act that most directly negates each induction cause; mirrors the
# first step of the default productive sub-policies.
MATCHED_ACT = {
    InductionType.COMPLEX_INFORMATION: DialogueActType.INFORMATION_SUPPLEMENT,
    InductionType.CONTRADICTORY_INFORMATION: DialogueActType.RESPONSE_CORRECTION,
    InductionType.INSUFFICIENT_INFORMATION: DialogueActType.INFORMATION_EXTENSION,
    InductionType.FALSE_FEEDBACK: DialogueActType.RESPONSE_CORRECTION,
}

DEFAULT_INITIAL_LEVELS = {
    InductionType.COMPLEX_INFORMATION: 0.55,
    InductionType.CONTRADICTORY_INFORMATION: 0.60,
    InductionType.INSUFFICIENT_INFORMATION: 0.50,
    InductionType.FALSE_FEEDBACK: 0.65,
}


def default_params() -> SimUserParams:
    """Shipped defaults: matched acts help most, everything else a little."""
    effect = {}
    for act in DialogueActType:
        for induction in InductionType:
            if act is MATCHED_ACT[induction]:
                mean = -0.30
            elif act is DialogueActType.SUBJECT_CHANGE:
                mean = -0.20
            else:
                mean = -0.10
            effect[(act, induction)] = EffectDist(mean_delta=mean, sd=0.10)
    return SimUserParams(
        initial_level=dict(DEFAULT_INITIAL_LEVELS),
        effect=effect,
        drift=0.05,
        noise_sd=0.05,
    )


@dataclass
class Scenario:
    induction: InductionType
    params: SimUserParams = field(default_factory=default_params)
    max_turns: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")


class SimUser:
    """One simulated user with a private deterministic random stream."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.induction = scenario.induction
        self.params = scenario.params
        self.level = scenario.params.initial_level[scenario.induction]
        self.turns_used = 0
        self.rng = np.random.default_rng(scenario.seed)

    def initial_observation(self) -> Observation:
        """Pre-interaction confusion report; does not consume a turn."""
        return Observation(
            level=ConfusionLevel(self.level),
            induction=self.induction,
            source=ObservationSource.SIMULATED,
        )

    def respond(self, act: Optional[DialogueAct]) -> Observation:
        """Apply one act (or drift) and report the new confusion level."""
        if self.turns_used >= self.scenario.max_turns:
            raise TurnLimitExceeded(
                f"simulated user exceeded max_turns={self.scenario.max_turns}"
            )
        if act is None:
            mu, sd = self.params.drift, 0.0
        else:
            dist = self.params.effect[(act.act_type, self.induction)]
            mu, sd = dist.mean_delta, dist.sd
        sigma = math.hypot(sd, self.params.noise_sd)
        delta = float(self.rng.normal(mu, sigma))
        self.level = min(1.0, max(0.0, self.level + delta))
        self.turns_used += 1
        return Observation(
            level=ConfusionLevel(self.level),
            induction=self.induction,
            source=ObservationSource.SIMULATED,
        )


def induce(scenario: Scenario) -> SimUser:
    return SimUser(scenario)
