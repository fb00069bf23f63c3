import pytest

from mitigator.acts import (
    CANONICAL_ORDER,
    DialogueActType,
    MissingContextField,
    TurnContext,
    act_descriptor,
    default_turn_context,
    render_act,
)


class TestDescriptors:
    def test_restatement_is_first(self):
        d = act_descriptor(DialogueActType.RESTATEMENT)
        assert d.index == 1
        assert "repeats the information or question" in d.description

    def test_subject_change_is_seventh(self):
        assert act_descriptor(DialogueActType.SUBJECT_CHANGE).index == 7

    def test_bijection_with_indices(self):
        descriptors = [act_descriptor(a) for a in DialogueActType]
        assert sorted(d.index for d in descriptors) == list(range(1, 8))
        assert len({d.description for d in descriptors}) == 7
        assert len(CANONICAL_ORDER) == 7


class TestRendering:
    def test_restatement_repeats_prior_prompt(self):
        ctx = TurnContext(prior_utterance="how do you solve the maze task?")
        act = render_act(DialogueActType.RESTATEMENT, ctx)
        assert "how do you solve the maze task?" in act.utterance

    def test_subject_change_introduces_new_topic(self):
        ctx = TurnContext(new_topic="a warm-up question")
        act = render_act(DialogueActType.SUBJECT_CHANGE, ctx)
        assert "a warm-up question" in act.utterance

    def test_missing_field_raises(self):
        with pytest.raises(MissingContextField):
            render_act(DialogueActType.FEEDBACK_REQUEST, TurnContext())

    def test_deterministic(self):
        ctx = default_turn_context()
        a = render_act(DialogueActType.CONFIRMATION, ctx)
        b = render_act(DialogueActType.CONFIRMATION, ctx)
        assert a == b

    def test_injective_in_act_type(self):
        ctx = default_turn_context()
        utterances = [render_act(a, ctx).utterance for a in DialogueActType]
        assert len(set(utterances)) == 7

    def test_empty_utterance_rejected(self):
        from mitigator.acts import DialogueAct
        with pytest.raises(ValueError):
            DialogueAct(DialogueActType.RESTATEMENT, "", 0, "adhoc")
