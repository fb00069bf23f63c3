"""Confusion-mitigation dialogue policy engine and evaluation toolkit."""

from .model import (
    AffectState,
    ConfusionAssessment,
    ConfusionLevel,
    ConfusionZone,
    InductionType,
    PersistenceLimits,
    Thresholds,
    classify_zone,
    is_mitigated,
    step_affect,
)
from .acts import (
    ActCatalog,
    ActDescriptor,
    ActTemplate,
    DialogueAct,
    DialogueActType,
    MissingContextField,
    TurnContext,
    act_descriptor,
    render_act,
)
from .dsl import (
    Diagnostic,
    DuplicateSection,
    OnFailure,
    ParseError,
    PolicyAst,
    PolicyProgram,
    PolicySource,
    StepSpec,
    UnknownAct,
    builtin_default,
    compile_policy,
    load_program,
    parse_policy,
    serialize_policy,
    validate_program,
)
from .engine import (
    Observation,
    ObservationSource,
    Session,
    SessionEvent,
    SessionStatus,
    new_session,
)
from .simulator import (
    EffectDist,
    Scenario,
    SimUser,
    SimUserParams,
    default_params,
    induce,
)
from .exact import ExactReport, StateSpaceTooLarge, exact_analysis
from .harness import (
    MetricsReport,
    RunConfig,
    TrialOutcome,
    emit_report,
    replay_log,
    run_batch,
    run_trial,
)

__version__ = "0.1.0"
