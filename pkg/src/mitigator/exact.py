"""Exact absorption analysis of the mitigation loop on a discretized grid.

This is a verification oracle, kept deliberately independent of the engine
implementation: it re-derives the deterministic dispatch rules in a compact
form and composes them with the simulated user's transition kernel, with
confusion levels quantized to a uniform grid. The resulting finite Markov
chain over (level bin, previous zone, affect, persistence, policy, step,
repeats) states is explored from the scenario's initial state; absorption
probabilities and the expected number of emitted acts come from a sparse
linear solve, so results are exact up to the level quantization.

The horizon is infinite: the harness's max_turns truncation is ignored,
which under sane parameters contributes well below the comparison bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve
from scipy.stats import norm

from .dsl import OnFailure, PolicyProgram
from .model import (
    AFFECT_CHAIN,
    AffectState,
    ConfusionLevel,
    ConfusionZone,
    InductionType,
    PersistenceLimits,
    Thresholds,
    classify_zone,
    step_affect,
)
from .simulator import SimUserParams

_PROB_EPS = 1e-12

# Absorbing outcomes.
RESOLVED, DISENGAGED, EXHAUSTED = range(3)

_IDLE, _PROD, _UNPROD = range(3)
_ZONES = list(ConfusionZone)


class StateSpaceTooLarge(Exception):
    pass


@dataclass(frozen=True)
class ExactReport:
    p_resolved: float
    p_disengaged: float
    p_exhausted: float
    mean_steps_resolved: Optional[float]
    n_states: int
    bins: int


def _level_kernel(values: np.ndarray, edges: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    """Row-stochastic bin-to-bin kernel for level <- clamp(level + delta)."""
    n = len(values)
    if sigma == 0.0:
        K = np.zeros((n, n))
        for i, v in enumerate(values):
            target = min(1.0, max(0.0, v + mu))
            K[i, int(np.argmin(np.abs(values - target)))] = 1.0
        return K
    # edges has n+1 entries with +-inf at the ends, so clamping mass
    # accumulates in the boundary bins.
    z = (edges[None, :] - values[:, None] - mu) / sigma
    cdf = norm.cdf(z)
    K = np.diff(cdf, axis=1)
    K[K < _PROB_EPS] = 0.0
    K /= K.sum(axis=1, keepdims=True)
    return K


def exact_analysis(
    program: PolicyProgram,
    params: SimUserParams,
    induction: InductionType,
    thresholds: Optional[Thresholds] = None,
    limits: Optional[PersistenceLimits] = None,
    bins: int = 101,
    max_states: int = 10 ** 6,
) -> ExactReport:
    """Absorption probabilities and expected acts for one scenario."""
    thresholds = thresholds or Thresholds()
    limits = limits or PersistenceLimits()
    if bins < 2:
        raise ValueError("bins must be >= 2")

    values = np.linspace(0.0, 1.0, bins)
    inner = (values[:-1] + values[1:]) / 2.0
    edges = np.concatenate(([-np.inf], inner, [np.inf]))

    zone_of_bin = [classify_zone(ConfusionLevel(v), thresholds) for v in values]

    prod_steps = program.productive[induction]
    unprod_steps = program.unproductive

    kernels: Dict[Tuple[float, float], np.ndarray] = {}

    def kernel_for(mu: float, sd: float) -> np.ndarray:
        sigma = math.hypot(sd, params.noise_sd)
        key = (mu, sigma)
        if key not in kernels:
            kernels[key] = _level_kernel(values, edges, mu, sigma)
        return kernels[key]

    drift_kernel = _level_kernel(values, edges, params.drift, params.noise_sd)

    pers_cap = limits.disengage_after  # larger counts behave identically

    # State: (bin, prev_zone_idx, affect_idx, persistence, policy, step, repeats)
    State = Tuple[int, int, int, int, int, int, int]
    index: Dict[State, int] = {}
    order = []
    rows, cols, probs = [], [], []
    absorb = []   # per-state [p_res, p_dis, p_exh]
    emits = []    # 1 if the state emits an act this turn

    def intern(s: State) -> int:
        if s not in index:
            if len(index) >= max_states:
                raise StateSpaceTooLarge(
                    f"reachable state space exceeds max_states={max_states}"
                )
            index[s] = len(order)
            order.append(s)
        return index[s]

    init_bin = int(np.argmin(np.abs(values - params.initial_level[induction])))
    start = intern((init_bin, 0, 0, 0, _IDLE, 0, 0))

    frontier = [start]
    expanded = set()
    while frontier:
        i = frontier.pop()
        if i in expanded:
            continue
        expanded.add(i)
        b, pz, ai, pers, pol, st, rep = order[i]
        while len(absorb) <= i:
            absorb.append(None)
            emits.append(0)

        zone = zone_of_bin[b]
        prev_zone = _ZONES[pz]
        pers2 = min(pers + 1, pers_cap) if zone is prev_zone else 0
        affect2 = step_affect(AFFECT_CHAIN[ai], zone, pers2, limits)

        if affect2 is AffectState.DISENGAGED:
            absorb[i] = DISENGAGED
            continue

        if zone is ConfusionZone.ENGAGED:
            if pol != _IDLE:
                absorb[i] = RESOLVED
                continue
            K = drift_kernel
            pol2, st2, rep2 = _IDLE, 0, 0
        else:
            desired = _PROD if zone is ConfusionZone.PRODUCTIVE_CONFUSION else _UNPROD
            pol2, st2, rep2 = pol, st, rep
            if pol2 != desired:
                pol2, st2, rep2 = desired, 0, 0
            else:
                steps = prod_steps if pol2 == _PROD else unprod_steps
                spec = steps[st2]
                if rep2 >= spec.max_repeats:
                    if spec.on_failure is OnFailure.NEXT_STEP:
                        st2, rep2 = st2 + 1, 0
                    elif spec.on_failure is OnFailure.GOTO_UNPRODUCTIVE:
                        pol2, st2, rep2 = _UNPROD, 0, 0
                    else:
                        absorb[i] = EXHAUSTED
                        continue
            steps = prod_steps if pol2 == _PROD else unprod_steps
            dist = params.effect[(steps[st2].act_type, induction)]
            K = kernel_for(dist.mean_delta, dist.sd)
            rep2 += 1
            emits[i] = 1

        zi = _ZONES.index(zone)
        a2 = AFFECT_CHAIN.index(affect2)
        row = K[b]
        for dst in np.nonzero(row)[0]:
            j = intern((int(dst), zi, a2, pers2, pol2, st2, rep2))
            rows.append(i)
            cols.append(j)
            probs.append(row[dst])
            if j not in expanded:
                frontier.append(j)

    n = len(order)
    absorb += [None] * (n - len(absorb))
    emits += [0] * (n - len(emits))

    Q = sparse.csr_matrix((probs, (rows, cols)), shape=(n, n))
    r_res = np.array([1.0 if a == RESOLVED else 0.0 for a in absorb])
    r_dis = np.array([1.0 if a == DISENGAGED else 0.0 for a in absorb])
    r_exh = np.array([1.0 if a == EXHAUSTED else 0.0 for a in absorb])
    emit_vec = np.array(emits, dtype=float)

    A = (sparse.identity(n, format="csr") - Q).tocsc()
    h_res = spsolve(A, r_res)
    h_dis = spsolve(A, r_dis)
    h_exh = spsolve(A, r_exh)
    # u_i = E[acts emitted, counted only on runs that resolve]
    u = spsolve(A, emit_vec * h_res)

    p_res = float(h_res[start])
    mean_steps = float(u[start] / p_res) if p_res > 0 else None
    return ExactReport(
        p_resolved=p_res,
        p_disengaged=float(h_dis[start]),
        p_exhausted=float(h_exh[start]),
        mean_steps_resolved=mean_steps,
        n_states=n,
        bins=bins,
    )
