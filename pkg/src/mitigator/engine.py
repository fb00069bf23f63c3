"""Session state machine: observations in, mitigation acts out.

A session alternates strictly between recording a confusion observation and
emitting (at most) one mitigation act. Zone dispatch picks the active
policy: productive confusion runs the induction-specific sub-policy,
unproductive confusion runs the reengagement sequence. An act "fails" when
the zone rank does not improve while it was on the table; failure applies
the step's on_failure rule (advance, hand over, or end the episode).

Sessions are single-owner: callers serialize access per session. Compiled
programs are immutable and shared freely.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

from .acts import DialogueAct, DialogueActType, TurnContext, default_turn_context
from .dsl import OnFailure, PolicyProgram, StepSpec
from .model import (
    AffectState,
    ConfusionAssessment,
    ConfusionLevel,
    ConfusionZone,
    InductionType,
    PersistenceLimits,
    Thresholds,
    classify_zone,
    step_affect,
    zone_rank,
)


class EngineError(Exception):
    pass


class ObservationAfterEnd(EngineError):
    pass


class ActAfterEnd(EngineError):
    pass


class NoObservation(EngineError):
    pass


class MissingInduction(EngineError):
    pass


class SessionStatus(Enum):
    ACTIVE = "active"
    RESOLVED = "resolved"
    ENDED = "ended"


class EventKind(Enum):
    OBSERVATION_RECORDED = "observation_recorded"
    ACT_EMITTED = "act_emitted"
    POLICY_SWITCHED = "policy_switched"
    EPISODE_RESOLVED = "episode_resolved"
    SESSION_ENDED = "session_ended"


class ObservationSource(Enum):
    SIMULATED = "simulated"
    WIZARD = "wizard"


@dataclass(frozen=True)
class Observation:
    level: ConfusionLevel
    induction: Optional[InductionType] = None
    source: ObservationSource = ObservationSource.SIMULATED


@dataclass(frozen=True)
class SessionEvent:
    turn: int
    kind: EventKind
    payload: dict
    timestamp_ms: int


# Active policy is None (idle) or a (kind, induction) pair.
POLICY_GENERAL = "general"
POLICY_UNPRODUCTIVE = "unproductive"


def policy_id(active: Optional[Tuple[str, Optional[InductionType]]]) -> str:
    if active is None:
        return "idle"
    kind, induction = active
    if kind == "productive":
        return f"productive/{induction.value}"
    return kind


class Session:
    """Single mitigation session; see module docstring for the turn loop."""

    def __init__(
        self,
        program: PolicyProgram,
        thresholds: Optional[Thresholds] = None,
        limits: Optional[PersistenceLimits] = None,
        seed: int = 0,
        session_id: Optional[str] = None,
        context: Optional[TurnContext] = None,
        dispatch_mode: str = "subpolicy",
        overrides_advance: bool = False,
        clock: Optional[Callable[[], int]] = None,
    ):
        if dispatch_mode not in ("subpolicy", "general"):
            raise ValueError(f"unknown dispatch mode: {dispatch_mode}")
        self.program = program
        self.thresholds = thresholds or Thresholds()
        self.limits = limits or PersistenceLimits()
        self.rng_seed = seed
        self.session_id = session_id or uuid.uuid4().hex[:16]
        self.context = context or default_turn_context()
        self.dispatch_mode = dispatch_mode
        self.overrides_advance = overrides_advance

        self.status = SessionStatus.ACTIVE
        self.end_reason: Optional[str] = None
        self.assessment = ConfusionAssessment(
            level=ConfusionLevel(0.0),
            zone=ConfusionZone.ENGAGED,
            affect=AffectState.ENGAGEMENT,
            persistence_turns=0,
        )
        self.induction: Optional[InductionType] = None
        self.active_policy: Optional[Tuple[str, Optional[InductionType]]] = None
        self.step_index = 0
        self.repeats_used = 0
        self._step_start_rank = 0
        self._pending_observation = False
        self._events: List[SessionEvent] = []
        self._turn = 0
        self._last_act: Optional[DialogueAct] = None
        if clock is not None:
            self._clock = clock
        else:
            start = time.monotonic()
            self._clock = lambda: int((time.monotonic() - start) * 1000)

    # -- event log -------------------------------------------------------

    def _append(self, kind: EventKind, payload: dict):
        self._events.append(SessionEvent(self._turn, kind, payload, self._clock()))

    def transcript(self) -> List[SessionEvent]:
        return list(self._events)

    # -- observation side ------------------------------------------------

    def observe(self, obs: Observation) -> ConfusionAssessment:
        if self.status is SessionStatus.ENDED:
            raise ObservationAfterEnd(f"session ended: {self.end_reason}")

        zone = classify_zone(obs.level, self.thresholds)
        if zone is not ConfusionZone.ENGAGED and self.induction is None and obs.induction is None:
            raise MissingInduction(
                "first confused observation must declare an induction type"
            )
        if obs.induction is not None:
            self.induction = obs.induction

        prev_zone = self.assessment.zone
        persistence = self.assessment.persistence_turns + 1 if zone is prev_zone else 0
        affect = step_affect(self.assessment.affect, zone, persistence, self.limits)
        self.assessment = ConfusionAssessment(obs.level, zone, affect, persistence)
        if self.status is SessionStatus.RESOLVED:
            self.status = SessionStatus.ACTIVE

        self._turn += 1
        self._append(EventKind.OBSERVATION_RECORDED, {
            "level": obs.level.value,
            "zone": zone.value,
            "affect": affect.value,
            "persistence_turns": persistence,
            "induction": obs.induction.value if obs.induction else None,
            "source": obs.source.value,
        })
        self._pending_observation = True

        if zone is ConfusionZone.ENGAGED and self.active_policy is not None:
            self._append(EventKind.EPISODE_RESOLVED, {
                "policy": policy_id(self.active_policy),
            })
            self.active_policy = None
            self.step_index = 0
            self.repeats_used = 0
            self.status = SessionStatus.RESOLVED

        if affect is AffectState.DISENGAGED:
            self._end("disengaged")
        return self.assessment

    def _end(self, reason: str):
        self.status = SessionStatus.ENDED
        self.end_reason = reason
        self._append(EventKind.SESSION_ENDED, {"reason": reason})

    # -- act side --------------------------------------------------------

    def _desired_policy(self, zone: ConfusionZone) -> Tuple[str, Optional[InductionType]]:
        if self.dispatch_mode == "general":
            # Once escalated to the reengagement sequence, stay there.
            if self.active_policy is not None and self.active_policy[0] == POLICY_UNPRODUCTIVE:
                return self.active_policy
            return (POLICY_GENERAL, None)
        if zone is ConfusionZone.PRODUCTIVE_CONFUSION:
            return ("productive", self.induction)
        return (POLICY_UNPRODUCTIVE, None)

    def _policy_steps(self) -> Tuple[StepSpec, ...]:
        kind, induction = self.active_policy
        if kind == POLICY_GENERAL:
            return self.program.general
        if kind == "productive":
            return self.program.productive[induction]
        return self.program.unproductive

    def _switch_policy(self, desired):
        self._append(EventKind.POLICY_SWITCHED, {
            "from": policy_id(self.active_policy),
            "to": policy_id(desired),
        })
        self.active_policy = desired
        self.step_index = 0
        self.repeats_used = 0
        self._step_start_rank = zone_rank(self.assessment.zone)

    def _apply_failure(self, step: StepSpec):
        if step.on_failure is OnFailure.NEXT_STEP:
            self.step_index += 1
            self.repeats_used = 0
            self._step_start_rank = zone_rank(self.assessment.zone)
        elif step.on_failure is OnFailure.GOTO_UNPRODUCTIVE:
            self._switch_policy((POLICY_UNPRODUCTIVE, None))
        else:
            self._end("exhausted")

    def next_act(self, force_act_type: Optional[DialogueActType] = None,
                 overridden: bool = False) -> Optional[DialogueAct]:
        if self.status is SessionStatus.ENDED:
            raise ActAfterEnd(f"session ended: {self.end_reason}")
        if not self._pending_observation:
            raise NoObservation("an observation is required before the next act")

        zone = self.assessment.zone
        if zone is ConfusionZone.ENGAGED:
            self._pending_observation = False
            self._last_act = None
            return None

        desired = self._desired_policy(zone)
        if self.active_policy != desired:
            self._switch_policy(desired)
        else:
            rank = zone_rank(zone)
            step = self._policy_steps()[self.step_index]
            if self.repeats_used >= step.max_repeats:
                if rank >= self._step_start_rank:
                    self._apply_failure(step)
                    if self.status is SessionStatus.ENDED:
                        self._pending_observation = False
                        return None
                else:
                    # The act helped (rank dropped) without full resolution:
                    # give the same step a fresh budget.
                    self.repeats_used = 0
                    self._step_start_rank = rank

        step = self._policy_steps()[self.step_index]
        act_type = force_act_type if force_act_type is not None else step.act_type
        utterance = self.program.catalog.render(act_type, self.context)
        act = DialogueAct(act_type, utterance, self.step_index, policy_id(self.active_policy))
        self.repeats_used += 1
        self._pending_observation = False
        self._last_act = act
        payload = {
            "act_type": act.act_type.value,
            "utterance": act.utterance,
            "step_index": act.step_index,
            "policy_id": act.policy_id,
        }
        if overridden:
            payload["overridden"] = True
        self._append(EventKind.ACT_EMITTED, payload)
        return act

    def record_override(self, act_type: DialogueActType) -> DialogueAct:
        """Wizard-chosen act replacing (or pre-empting) the recommendation.

        With ``overrides_advance`` set and an observation still pending, the
        override goes through the normal bookkeeping path. Otherwise it is
        log-only: the event carries ``overridden: true`` and the ladder
        position is unchanged.
        """
        if self.status is SessionStatus.ENDED:
            raise ActAfterEnd(f"session ended: {self.end_reason}")
        if self._pending_observation and self.overrides_advance:
            act = self.next_act(force_act_type=act_type, overridden=True)
            if act is None:
                raise NoObservation("no mitigation act applicable (zone engaged or episode over)")
            return act
        utterance = self.program.catalog.render(act_type, self.context)
        last = self._last_act
        act = DialogueAct(
            act_type,
            utterance,
            last.step_index if last else 0,
            last.policy_id if last else "wizard",
        )
        self._append(EventKind.ACT_EMITTED, {
            "act_type": act.act_type.value,
            "utterance": act.utterance,
            "step_index": act.step_index,
            "policy_id": act.policy_id,
            "overridden": True,
        })
        self._last_act = act
        return act


def new_session(
    program: PolicyProgram,
    thresholds: Optional[Thresholds] = None,
    limits: Optional[PersistenceLimits] = None,
    seed: int = 0,
    **kwargs,
) -> Session:
    return Session(program, thresholds=thresholds, limits=limits, seed=seed, **kwargs)
