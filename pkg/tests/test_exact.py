import pytest

from mitigator.dsl import builtin_default, compile_policy, parse_policy
from mitigator.exact import StateSpaceTooLarge, exact_analysis
from mitigator.model import InductionType
from mitigator.simulator import EffectDist, SimUserParams, default_params


@pytest.fixture(scope="module")
def program():
    source = builtin_default()
    return compile_policy(parse_policy(source), source)


def flat_params(matched_delta=-0.30, other_delta=-0.10, drift=0.05, sd=0.0, noise_sd=0.0):
    from mitigator.simulator import MATCHED_ACT
    from mitigator.acts import DialogueActType
    p = default_params()
    effect = {}
    for (act, induction) in p.effect:
        delta = matched_delta if act is MATCHED_ACT[induction] else other_delta
        effect[(act, induction)] = EffectDist(delta, sd)
    return SimUserParams(p.initial_level, effect, drift=drift, noise_sd=noise_sd)


class TestDegenerateChains:
    def test_always_effective_resolves_in_one_step(self, program):
        params = flat_params(matched_delta=-1.0, other_delta=-1.0)
        rep = exact_analysis(program, params, InductionType.COMPLEX_INFORMATION)
        assert rep.p_resolved == pytest.approx(1.0)
        assert rep.mean_steps_resolved == pytest.approx(1.0)

    def test_never_effective_exhausts(self, program):
        params = flat_params(matched_delta=0.0, other_delta=0.0)
        rep = exact_analysis(program, params, InductionType.COMPLEX_INFORMATION)
        assert rep.p_resolved == pytest.approx(0.0)
        assert rep.p_disengaged + rep.p_exhausted == pytest.approx(1.0)

    def test_deterministic_chain_hand_traceable(self, program):
        # 0.55 - 0.30 = 0.25 engaged after one matched act: path length 1.
        params = flat_params()
        rep = exact_analysis(program, params, InductionType.COMPLEX_INFORMATION)
        assert rep.p_resolved == pytest.approx(1.0)
        assert rep.p_disengaged == pytest.approx(0.0)
        assert rep.mean_steps_resolved == pytest.approx(1.0)

    def test_deterministic_two_step_path(self, program):
        # insufficient starts at 0.50; matched -0.15 twice: 0.50 -> 0.35 -> 0.20.
        params = flat_params(matched_delta=-0.15, other_delta=-0.15)
        rep = exact_analysis(program, params, InductionType.INSUFFICIENT_INFORMATION)
        assert rep.p_resolved == pytest.approx(1.0)
        assert rep.mean_steps_resolved == pytest.approx(2.0)


class TestGuards:
    def test_state_space_bound(self, program):
        with pytest.raises(StateSpaceTooLarge):
            exact_analysis(
                program, default_params(), InductionType.COMPLEX_INFORMATION,
                bins=101, max_states=10,
            )

    def test_bins_validation(self, program):
        with pytest.raises(ValueError):
            exact_analysis(program, default_params(), InductionType.COMPLEX_INFORMATION, bins=1)


def test_default_reference_values_stable(program):
    # Frozen fixture: recorded once from this oracle at 101 bins; guards
    # against silent behavior drift. Monte Carlo agreement is asserted in
    # the acceptance suite.
    rep = exact_analysis(program, default_params(), InductionType.COMPLEX_INFORMATION, bins=101)
    assert rep.p_resolved == pytest.approx(0.858241, abs=1e-4)
    assert rep.mean_steps_resolved == pytest.approx(1.235955, abs=1e-4)
    assert rep.p_disengaged == pytest.approx(0.0, abs=1e-9)
