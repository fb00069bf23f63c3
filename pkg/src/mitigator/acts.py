"""The seven mitigation dialogue act types and utterance rendering.

The catalog fixes the canonical act ordering (indices 1-7) and renders
concrete utterances by filling string templates from a small turn context.
Surface wording is configuration, not semantics: templates can be replaced
wholesale through a policy file's ``[templates]`` section.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class DialogueActType(Enum):
    RESTATEMENT = "restatement"
    FEEDBACK_REQUEST = "feedback_request"
    INFORMATION_EXTENSION = "information_extension"
    INFORMATION_SUPPLEMENT = "information_supplement"
    RESPONSE_CORRECTION = "response_correction"
    CONFIRMATION = "confirmation"
    SUBJECT_CHANGE = "subject_change"


CANONICAL_ORDER = [
    DialogueActType.RESTATEMENT,
    DialogueActType.FEEDBACK_REQUEST,
    DialogueActType.INFORMATION_EXTENSION,
    DialogueActType.INFORMATION_SUPPLEMENT,
    DialogueActType.RESPONSE_CORRECTION,
    DialogueActType.CONFIRMATION,
    DialogueActType.SUBJECT_CHANGE,
]

# Names as they appear in policy files.
ACT_DSL_NAMES = {
    DialogueActType.RESTATEMENT: "Restatement",
    DialogueActType.FEEDBACK_REQUEST: "FeedbackRequest",
    DialogueActType.INFORMATION_EXTENSION: "InformationExtension",
    DialogueActType.INFORMATION_SUPPLEMENT: "InformationSupplement",
    DialogueActType.RESPONSE_CORRECTION: "ResponseCorrection",
    DialogueActType.CONFIRMATION: "Confirmation",
    DialogueActType.SUBJECT_CHANGE: "SubjectChange",
}
DSL_NAME_TO_ACT = {name: act for act, name in ACT_DSL_NAMES.items()}


@dataclass(frozen=True)
class ActDescriptor:
    index: int
    name: str
    description: str


_DESCRIPTIONS = {
    DialogueActType.RESTATEMENT: "The agent repeats the information or question.",
    DialogueActType.FEEDBACK_REQUEST: "The agent asks for the participant's feedback and response.",
    DialogueActType.INFORMATION_EXTENSION: (
        "The agent provides more information to expand on the information or question already raised."
    ),
    DialogueActType.INFORMATION_SUPPLEMENT: (
        "The agent provides comprehensive information or questions in different ways"
        " for participants to quickly understand easily."
    ),
    DialogueActType.RESPONSE_CORRECTION: (
        "The agent provides the appropriate response in order to avoid confusion states on the participant."
    ),
    DialogueActType.CONFIRMATION: (
        "The agent admits that the information or question has one or more issues"
        " leading to the participant being confused."
    ),
    DialogueActType.SUBJECT_CHANGE: "The agent changes straightforward questions or other topics.",
}


def act_descriptor(act_type: DialogueActType) -> ActDescriptor:
    return ActDescriptor(
        index=CANONICAL_ORDER.index(act_type) + 1,
        name=ACT_DSL_NAMES[act_type],
        description=_DESCRIPTIONS[act_type],
    )


# Placeholders a template may reference; TurnContext carries exactly these.
CONTEXT_FIELDS = ("topic", "prior_utterance", "prior_agent_info", "new_topic")


@dataclass
class TurnContext:
    topic: Optional[str] = None
    prior_utterance: Optional[str] = None
    prior_agent_info: Optional[str] = None
    new_topic: Optional[str] = None

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in CONTEXT_FIELDS}


def default_turn_context() -> TurnContext:
    return TurnContext(
        topic="the current task",
        prior_utterance="the last question I asked",
        prior_agent_info="a step-by-step breakdown",
        new_topic="a simpler warm-up question",
    )


@dataclass(frozen=True)
class ActTemplate:
    act_type: DialogueActType
    template_text: str
    description: str = ""

    def placeholders(self) -> set:
        return {
            name
            for _, name, _, _ in string.Formatter().parse(self.template_text)
            if name is not None
        }


@dataclass(frozen=True)
class DialogueAct:
    act_type: DialogueActType
    utterance: str
    step_index: int = 0
    policy_id: str = "adhoc"

    def __post_init__(self):
        if not self.utterance:
            raise ValueError("utterance must be non-empty")
        if self.step_index < 0:
            raise ValueError("step_index must be non-negative")


class MissingContextField(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"turn context is missing required field: {name}")


DEFAULT_TEMPLATE_TEXTS = {
    DialogueActType.RESTATEMENT: "Let me repeat that: {prior_utterance}",
    DialogueActType.FEEDBACK_REQUEST: "How are you finding {topic} so far? Tell me what you think.",
    DialogueActType.INFORMATION_EXTENSION: "Here is some more detail on {topic}: {prior_agent_info}.",
    DialogueActType.INFORMATION_SUPPLEMENT: "Let me put {topic} another way, so it is easier to follow.",
    DialogueActType.RESPONSE_CORRECTION: "Let me clear that up with the correct information about {topic}.",
    DialogueActType.CONFIRMATION: "You are right to hesitate; what I said about {topic} had a problem.",
    DialogueActType.SUBJECT_CHANGE: "Let us set that aside for now and try {new_topic}.",
}


def default_templates() -> list:
    return [
        ActTemplate(act, text, _DESCRIPTIONS[act])
        for act, text in DEFAULT_TEMPLATE_TEXTS.items()
    ]


@dataclass
class ActCatalog:
    """Immutable-after-construction act/template lookup."""

    templates: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(DEFAULT_TEMPLATE_TEXTS)
        for act, text in self.templates.items():
            merged[act] = text
        self.templates = merged

    def render(self, act_type: DialogueActType, context: TurnContext) -> str:
        template = ActTemplate(act_type, self.templates[act_type])
        values = context.as_dict()
        for name in template.placeholders():
            if values.get(name) is None:
                raise MissingContextField(name)
        return template.template_text.format(**values)


def render_act(
    act_type: DialogueActType,
    context: TurnContext,
    step_index: int = 0,
    policy_id: str = "adhoc",
    catalog: Optional[ActCatalog] = None,
) -> DialogueAct:
    """Instantiate the act's template with the turn context."""
    catalog = catalog or ActCatalog()
    return DialogueAct(
        act_type=act_type,
        utterance=catalog.render(act_type, context),
        step_index=step_index,
        policy_id=policy_id,
    )
