"""Batch evaluation harness: policy x scenario grids, metrics, JSONL logs.

Each trial couples one engine session with one simulated user and runs the
strict observe/act alternation until the episode resolves, the user
disengages, the policy exhausts, or the turn budget runs out. Per-trial
seeds are derived from the root seed and the (scenario, trial) indices, so
adding trials never perturbs earlier ones.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dsl import PolicyProgram
from .engine import (
    EventKind,
    Observation,
    Session,
    SessionEvent,
    SessionStatus,
)
from .model import (
    AFFECT_CHAIN,
    AffectState,
    ConfusionZone,
    InductionType,
    PersistenceLimits,
    Thresholds,
    zone_rank,
)
from .simulator import Scenario, SimUser, SimUserParams


class TrialOutcome(Enum):
    RESOLVED = "resolved"
    DISENGAGED = "disengaged"
    EXHAUSTED = "exhausted"
    TRUNCATED = "truncated"


@dataclass
class TrialResult:
    outcome: TrialOutcome
    acts_emitted: int
    act_counts: Dict[str, int]
    events: List[SessionEvent]
    seed: int


@dataclass
class CellMetrics:
    trials: int
    mitigation_rate: float
    mean_steps_to_resolution: Optional[float]
    disengagement_rate: float
    exhaustion_rate: float
    truncation_rate: float
    act_histogram: Dict[str, int]

    def check(self):
        total = (self.mitigation_rate + self.disengagement_rate
                 + self.exhaustion_rate + self.truncation_rate)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome rates must sum to 1, got {total}")


@dataclass
class MetricsReport:
    cells: Dict[Tuple[str, str], CellMetrics] = field(default_factory=dict)


@dataclass
class RunConfig:
    program: PolicyProgram
    scenarios: List[Scenario]
    trials: int = 100
    root_seed: int = 0
    output_dir: Optional[str] = None
    fmt: str = "summary"
    canonical: bool = True
    thresholds: Thresholds = field(default_factory=Thresholds)
    limits: PersistenceLimits = field(default_factory=PersistenceLimits)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def trial_seed(root_seed: int, scenario_index: int, trial_index: int) -> int:
    ss = np.random.SeedSequence([root_seed, scenario_index, trial_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_trial(
    program: PolicyProgram,
    scenario: Scenario,
    seed: int,
    thresholds: Optional[Thresholds] = None,
    limits: Optional[PersistenceLimits] = None,
    canonical: bool = True,
) -> TrialResult:
    """One engine-vs-simulated-user episode."""
    user = SimUser(dataclasses.replace(scenario, seed=seed))
    session = Session(
        program,
        thresholds=thresholds,
        limits=limits,
        seed=seed,
        session_id=f"trial-{seed:020d}",
        clock=(lambda: 0) if canonical else None,
    )
    act_counts: Dict[str, int] = {}
    acts = 0
    obs = user.initial_observation()
    outcome = TrialOutcome.TRUNCATED
    while True:
        session.observe(obs)
        if session.status is SessionStatus.RESOLVED:
            outcome = TrialOutcome.RESOLVED
            break
        if session.status is SessionStatus.ENDED:
            outcome = TrialOutcome.DISENGAGED
            break
        act = session.next_act()
        if session.status is SessionStatus.ENDED:
            outcome = TrialOutcome.EXHAUSTED
            break
        if act is not None:
            acts += 1
            act_counts[act.act_type.value] = act_counts.get(act.act_type.value, 0) + 1
        if user.turns_used >= scenario.max_turns:
            outcome = TrialOutcome.TRUNCATED
            break
        obs = user.respond(act)
    return TrialResult(outcome, acts, act_counts, session.transcript(), seed)


def event_to_dict(event: SessionEvent) -> dict:
    return {
        "turn": event.turn,
        "kind": event.kind.value,
        "payload": event.payload,
        "timestamp_ms": event.timestamp_ms,
    }


def write_trial_log(path: str, header: dict, events: List[SessionEvent]):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for event in events:
            fh.write(json.dumps(event_to_dict(event), sort_keys=True) + "\n")
    os.replace(tmp, path)


def run_batch(config: RunConfig) -> MetricsReport:
    report = MetricsReport()
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
    for s_idx, scenario in enumerate(config.scenarios):
        outcomes: Dict[TrialOutcome, int] = {o: 0 for o in TrialOutcome}
        steps_resolved: List[int] = []
        histogram: Dict[str, int] = {}
        for t_idx in range(config.trials):
            seed = trial_seed(config.root_seed, s_idx, t_idx)
            result = run_trial(
                config.program, scenario, seed,
                thresholds=config.thresholds, limits=config.limits,
                canonical=config.canonical,
            )
            outcomes[result.outcome] += 1
            if result.outcome is TrialOutcome.RESOLVED:
                steps_resolved.append(result.acts_emitted)
            for k, v in result.act_counts.items():
                histogram[k] = histogram.get(k, 0) + v
            if config.output_dir:
                header = {
                    "policy": config.program.name,
                    "checksum": config.program.checksum,
                    "scenario": scenario.induction.value,
                    "trial": t_idx,
                    "seed": seed,
                    "outcome": result.outcome.value,
                    "thresholds": {"t_a": config.thresholds.t_a, "t_b": config.thresholds.t_b},
                }
                name = f"{scenario.induction.value}_{t_idx:05d}.jsonl"
                write_trial_log(os.path.join(config.output_dir, name), header, result.events)
        n = config.trials
        cell = CellMetrics(
            trials=n,
            mitigation_rate=outcomes[TrialOutcome.RESOLVED] / n,
            mean_steps_to_resolution=(
                sum(steps_resolved) / len(steps_resolved) if steps_resolved else None
            ),
            disengagement_rate=outcomes[TrialOutcome.DISENGAGED] / n,
            exhaustion_rate=outcomes[TrialOutcome.EXHAUSTED] / n,
            truncation_rate=outcomes[TrialOutcome.TRUNCATED] / n,
            act_histogram=dict(sorted(histogram.items())),
        )
        cell.check()
        report.cells[(config.program.name, scenario.induction.value)] = cell
    return report


_SUMMARY_COLUMNS = [
    "policy", "scenario", "trials", "mitigation", "mean_steps",
    "disengaged", "exhausted", "truncated",
]


def emit_report(report: MetricsReport, fmt: str = "summary") -> str:
    """Render a report as an aligned text table or JSONL (stable key order)."""
    if fmt == "jsonl":
        lines = []
        for (policy, scenario), cell in sorted(report.cells.items()):
            cell.check()
            lines.append(json.dumps({
                "policy": policy,
                "scenario": scenario,
                "trials": cell.trials,
                "mitigation_rate": cell.mitigation_rate,
                "mean_steps_to_resolution": cell.mean_steps_to_resolution,
                "disengagement_rate": cell.disengagement_rate,
                "exhaustion_rate": cell.exhaustion_rate,
                "truncation_rate": cell.truncation_rate,
                "act_histogram": cell.act_histogram,
            }, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt != "summary":
        raise ValueError(f"unknown report format: {fmt}")
    rows = [_SUMMARY_COLUMNS]
    for (policy, scenario), cell in sorted(report.cells.items()):
        cell.check()
        mean_steps = "-" if cell.mean_steps_to_resolution is None else f"{cell.mean_steps_to_resolution:.3f}"
        rows.append([
            policy, scenario, str(cell.trials),
            f"{cell.mitigation_rate:.3f}", mean_steps,
            f"{cell.disengagement_rate:.3f}", f"{cell.exhaustion_rate:.3f}",
            f"{cell.truncation_rate:.3f}",
        ])
    widths = [max(len(r[c]) for r in rows) for c in range(len(_SUMMARY_COLUMNS))]
    out = []
    for r in rows:
        out.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(out) + "\n"


# -- transcript / log replay validation ---------------------------------

def validate_events(events: List[dict], strict_single_step: bool = False) -> List[str]:
    """Re-check engine invariants on a serialized transcript.

    Returns a list of human-readable violations (empty = clean).
    ``strict_single_step`` additionally requires failed steps to advance by
    exactly one (valid for policies where every step has repeats=1).
    """
    violations: List[str] = []
    last_affect: Optional[str] = None
    last_act_turn: Optional[int] = None
    last_zone: Optional[str] = None
    zone_before_last_act: Optional[str] = None
    last_act: Optional[dict] = None
    episode_break = True  # true until the first act of an episode
    chain_names = [a.value for a in AFFECT_CHAIN]

    for idx, ev in enumerate(events):
        kind = ev["kind"]
        payload = ev.get("payload", {})
        where = f"event {idx} (turn {ev.get('turn')})"

        if kind == EventKind.OBSERVATION_RECORDED.value:
            affect = payload.get("affect")
            if affect not in chain_names:
                violations.append(f"{where}: unknown affect {affect!r}")
            elif last_affect is not None:
                i, j = chain_names.index(last_affect), chain_names.index(affect)
                if abs(i - j) > 1:
                    violations.append(
                        f"{where}: affect jump {last_affect} -> {affect}")
                if last_affect == AffectState.DISENGAGED.value and affect != last_affect:
                    violations.append(f"{where}: left the terminal disengaged state")
            last_affect = affect
            last_zone = payload.get("zone")

        elif kind == EventKind.ACT_EMITTED.value:
            if payload.get("overridden"):
                continue  # wizard overrides share the turn of the act they replace
            turn = ev.get("turn")
            if last_act_turn is not None and turn <= last_act_turn:
                violations.append(f"{where}: act turn {turn} not increasing")
            last_act_turn = turn
            if last_zone == ConfusionZone.ENGAGED.value:
                violations.append(f"{where}: act emitted while zone engaged")
            pol = payload.get("policy_id", "")
            if last_zone == ConfusionZone.PRODUCTIVE_CONFUSION.value and not pol.startswith("productive") and pol != "general":
                violations.append(f"{where}: policy {pol} dispatched for productive zone")
            if last_zone == ConfusionZone.UNPRODUCTIVE_CONFUSION.value and pol not in ("unproductive", "general"):
                violations.append(f"{where}: policy {pol} dispatched for unproductive zone")
            step = payload.get("step_index", 0)
            if episode_break:
                if step != 0:
                    violations.append(f"{where}: episode starts at step {step}, not 0")
            elif last_act is not None and last_act.get("policy_id") == pol:
                prev_step = last_act.get("step_index", 0)
                prev_zone = zone_before_last_act
                improved = (
                    prev_zone is not None and last_zone is not None
                    and _rank(last_zone) < _rank(prev_zone)
                )
                if step < prev_step or step > prev_step + 1:
                    violations.append(
                        f"{where}: step moved {prev_step} -> {step} within one policy")
                elif strict_single_step and not improved and step != prev_step + 1:
                    violations.append(
                        f"{where}: failed step did not advance ({prev_step} -> {step})")
            last_act = payload
            zone_before_last_act = last_zone
            episode_break = False

        elif kind == EventKind.POLICY_SWITCHED.value:
            episode_break = True
        elif kind == EventKind.EPISODE_RESOLVED.value:
            episode_break = True
            last_act = None

    return violations


def _rank(zone_name: str) -> int:
    return zone_rank(ConfusionZone(zone_name))


def replay_log(path: str, strict_single_step: bool = False) -> List[str]:
    """Validate one JSONL trial log produced by run_batch."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines:
        return ["empty log file"]
    events = lines[1:]  # first line is the header
    return validate_events(events, strict_single_step=strict_single_step)


def default_scenarios(params: Optional[SimUserParams] = None, max_turns: int = 60) -> List[Scenario]:
    from .simulator import default_params
    params = params or default_params()
    return [Scenario(induction=i, params=params, max_turns=max_turns) for i in InductionType]
