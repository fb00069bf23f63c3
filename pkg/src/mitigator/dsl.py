"""Policy DSL: parse, validate, serialize and compile mitigation policies.

The format is deliberately line-oriented so every diagnostic can point at a
concrete line. A policy file has four kinds of sections:

    [general]                        escalation ladder over all seven acts
    [productive <induction>]         per-cause sub-policy (four sections)
    [unproductive]                   reengagement sequence
    [templates]                      optional utterance overrides

Step lines look like::

    step 1: Restatement repeats=1 on_failure=next

``on_failure`` is one of ``next`` (advance the ladder), ``unproductive``
(hand over to the reengagement sequence) or ``end`` (give up and end the
episode; only legal on the final step).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Dict, List, Optional

from .acts import (
    ACT_DSL_NAMES,
    ActCatalog,
    ActTemplate,
    CONTEXT_FIELDS,
    DSL_NAME_TO_ACT,
    DialogueActType,
)
from .model import InductionType


class OnFailure(Enum):
    NEXT_STEP = "next"
    GOTO_UNPRODUCTIVE = "unproductive"
    END_EPISODE = "end"


@dataclass(frozen=True)
class StepSpec:
    act_type: DialogueActType
    max_repeats: int = 1
    on_failure: OnFailure = OnFailure.NEXT_STEP

    def __post_init__(self):
        if self.max_repeats < 1:
            raise ValueError("max_repeats must be >= 1")


@dataclass(frozen=True)
class PolicySource:
    text: str
    origin: str = "builtin"


@dataclass
class PolicyAst:
    name: str = "unnamed"
    version: str = "1"
    general_ladder: List[StepSpec] = field(default_factory=list)
    productive_table: Dict[InductionType, List[StepSpec]] = field(default_factory=dict)
    unproductive_sequence: List[StepSpec] = field(default_factory=list)
    templates: List[ActTemplate] = field(default_factory=list)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


class ParseError(Exception):
    def __init__(self, message: str, line: int = 1, column: int = 1, excerpt: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.excerpt = excerpt
        loc = f"line {line}, column {column}: {message}"
        if excerpt:
            loc += f"\n    {excerpt}"
        super().__init__(loc)


class UnknownAct(ParseError):
    def __init__(self, name: str, line: int = 1, column: int = 1, excerpt: str = ""):
        self.act_name = name
        super().__init__(f"unknown act name: {name}", line, column, excerpt)


class DuplicateSection(ParseError):
    def __init__(self, section: str, line: int = 1, excerpt: str = ""):
        self.section = section
        super().__init__(f"duplicate section: [{section}]", line, 1, excerpt)


_INDUCTION_KEYS = {
    "complex": InductionType.COMPLEX_INFORMATION,
    "contradictory": InductionType.CONTRADICTORY_INFORMATION,
    "insufficient": InductionType.INSUFFICIENT_INFORMATION,
    "false_feedback": InductionType.FALSE_FEEDBACK,
}
_INDUCTION_KEY_BY_TYPE = {v: k for k, v in _INDUCTION_KEYS.items()}

_STEP_RE = re.compile(r"^step\s+(\d+)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)\s*(.*)$")
_SECTION_RE = re.compile(r"^\[([a-z_ ]+)\]$")
_TEMPLATE_RE = re.compile(r'^template\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*"(.*)"\s*$')
_META_RE = re.compile(r"^(name|version)\s*:\s*(\S.*)$")


def parse_policy(source: PolicySource) -> PolicyAst:
    """Parse DSL text into an AST; raises ParseError on malformed input."""
    ast = PolicyAst()
    lines = source.text.splitlines()
    seen_sections: set = set()
    current: Optional[str] = None  # section key
    current_steps: Optional[List[StepSpec]] = None
    expected_step = 1
    saw_general = False
    template_acts: set = set()

    def err(msg, lineno, col=1, text=""):
        raise ParseError(msg, lineno, col, text.strip())

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        m = _SECTION_RE.match(line)
        if m:
            header = m.group(1).strip()
            parts = header.split()
            if parts[0] == "general" and len(parts) == 1:
                key = "general"
                ast.general_ladder = current_steps = []
                saw_general = True
            elif parts[0] == "productive" and len(parts) == 2:
                if parts[1] not in _INDUCTION_KEYS:
                    err(f"unknown induction key: {parts[1]}", lineno, 1, raw)
                key = f"productive {parts[1]}"
                induction = _INDUCTION_KEYS[parts[1]]
                ast.productive_table[induction] = current_steps = []
            elif parts[0] == "unproductive" and len(parts) == 1:
                key = "unproductive"
                ast.unproductive_sequence = current_steps = []
            elif parts[0] == "templates" and len(parts) == 1:
                key = "templates"
                current_steps = None
            else:
                err(f"unknown section: [{header}]", lineno, 1, raw)
                continue
            if key in seen_sections:
                raise DuplicateSection(key, lineno, raw.strip())
            seen_sections.add(key)
            current = key
            expected_step = 1
            continue

        m = _META_RE.match(line)
        if m and current is None:
            if m.group(1) == "name":
                ast.name = m.group(2).strip()
            else:
                ast.version = m.group(2).strip()
            continue

        if current == "templates":
            m = _TEMPLATE_RE.match(line)
            if not m:
                err("expected a template line: template <ActName>: \"<text>\"", lineno, 1, raw)
            act_name, text = m.group(1), m.group(2)
            if act_name not in DSL_NAME_TO_ACT:
                raise UnknownAct(act_name, lineno, raw.find(act_name) + 1, raw.strip())
            act = DSL_NAME_TO_ACT[act_name]
            if act in template_acts:
                err(f"duplicate template for act: {act_name}", lineno, 1, raw)
            template_acts.add(act)
            ast.templates.append(ActTemplate(act, text))
            continue

        m = _STEP_RE.match(line)
        if m:
            if current_steps is None:
                err("step line outside a policy section", lineno, 1, raw)
            number = int(m.group(1))
            if number != expected_step:
                err(f"expected step {expected_step}, got step {number}", lineno, 1, raw)
            act_name = m.group(2)
            if act_name not in DSL_NAME_TO_ACT:
                raise UnknownAct(act_name, lineno, raw.find(act_name) + 1, raw.strip())
            max_repeats = 1
            on_failure = OnFailure.NEXT_STEP
            rest = m.group(3).strip()
            if rest:
                for token in rest.split():
                    if "=" not in token:
                        err(f"malformed attribute: {token}", lineno, raw.find(token) + 1, raw)
                    attr, value = token.split("=", 1)
                    if attr == "repeats":
                        if not value.isdigit() or int(value) < 1:
                            err(f"repeats must be a positive integer, got {value}",
                                lineno, raw.find(token) + 1, raw)
                        max_repeats = int(value)
                    elif attr == "on_failure":
                        try:
                            on_failure = OnFailure(value)
                        except ValueError:
                            err(f"on_failure must be next, unproductive or end, got {value}",
                                lineno, raw.find(token) + 1, raw)
                    else:
                        err(f"unknown attribute: {attr}", lineno, raw.find(token) + 1, raw)
            current_steps.append(StepSpec(DSL_NAME_TO_ACT[act_name], max_repeats, on_failure))
            expected_step += 1
            continue

        err("unrecognized line", lineno, 1, raw)

    if not saw_general:
        raise ParseError("missing [general] section", max(len(lines), 1))
    if not ast.general_ladder:
        raise ParseError("[general] section has no steps", max(len(lines), 1))
    return ast


def serialize_policy(ast: PolicyAst) -> str:
    """Render an AST back to DSL text; parse(serialize(ast)) == ast."""
    out = [f"name: {ast.name}", f"version: {ast.version}", ""]

    def emit_steps(steps):
        for i, s in enumerate(steps, 1):
            out.append(
                f"step {i}: {ACT_DSL_NAMES[s.act_type]} "
                f"repeats={s.max_repeats} on_failure={s.on_failure.value}"
            )

    out.append("[general]")
    emit_steps(ast.general_ladder)
    for induction in InductionType:
        if induction in ast.productive_table:
            out.append("")
            out.append(f"[productive {_INDUCTION_KEY_BY_TYPE[induction]}]")
            emit_steps(ast.productive_table[induction])
    if ast.unproductive_sequence:
        out.append("")
        out.append("[unproductive]")
        emit_steps(ast.unproductive_sequence)
    if ast.templates:
        out.append("")
        out.append("[templates]")
        for t in ast.templates:
            out.append(f'template {ACT_DSL_NAMES[t.act_type]}: "{t.template_text}"')
    return "\n".join(out) + "\n"


def validate_program(ast: PolicyAst) -> List[Diagnostic]:
    """Semantic checks; an empty list means the AST is compilable."""
    diags: List[Diagnostic] = []

    if not ast.general_ladder:
        diags.append(Diagnostic(0, "general ladder is empty"))
    for induction in InductionType:
        if induction not in ast.productive_table or not ast.productive_table[induction]:
            diags.append(Diagnostic(0, f"induction type not covered: {induction.value}"))
    if not ast.unproductive_sequence:
        diags.append(Diagnostic(0, "unproductive sequence is empty"))

    def check_sequence(label, steps, require_terminal=False):
        for i, s in enumerate(steps):
            final = i == len(steps) - 1
            if s.on_failure is OnFailure.END_EPISODE and not final:
                diags.append(Diagnostic(
                    0, f"{label}: unreachable steps after end at step {i + 1}"))
            if final and s.on_failure is OnFailure.NEXT_STEP:
                diags.append(Diagnostic(
                    0, f"{label}: final step cannot fall through to a next step"))
        if require_terminal and steps and steps[-1].on_failure is not OnFailure.END_EPISODE:
            diags.append(Diagnostic(
                0, f"{label}: final step must be able to end the episode"))

    check_sequence("general", ast.general_ladder)
    for induction, steps in ast.productive_table.items():
        check_sequence(f"productive {_INDUCTION_KEY_BY_TYPE[induction]}", steps)
    check_sequence("unproductive", ast.unproductive_sequence, require_terminal=True)

    allowed = set(CONTEXT_FIELDS)
    for t in ast.templates:
        extra = t.placeholders() - allowed
        if extra:
            diags.append(Diagnostic(
                0,
                f"template {ACT_DSL_NAMES[t.act_type]} references undeclared "
                f"placeholders: {', '.join(sorted(extra))}",
            ))
    return diags


@dataclass(frozen=True)
class PolicyProgram:
    """Compiled, validated policy ready for O(1) step lookup."""

    name: str
    version: str
    general: tuple
    productive: dict  # InductionType -> tuple[StepSpec]
    unproductive: tuple
    catalog: ActCatalog
    checksum: str


def compile_policy(ast: PolicyAst, source: Optional[PolicySource] = None) -> PolicyProgram:
    """Compile a validated AST; refuses ASTs carrying diagnostics."""
    diags = validate_program(ast)
    if diags:
        raise ValueError(
            "cannot compile policy with diagnostics:\n"
            + "\n".join(str(d) for d in diags)
        )
    text = source.text if source is not None else serialize_policy(ast)
    checksum = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return PolicyProgram(
        name=ast.name,
        version=ast.version,
        general=tuple(ast.general_ladder),
        productive={k: tuple(v) for k, v in ast.productive_table.items()},
        unproductive=tuple(ast.unproductive_sequence),
        catalog=ActCatalog({t.act_type: t.template_text for t in ast.templates}),
        checksum=checksum,
    )


def builtin_default() -> PolicySource:
    """The shipped default policy, embedded as package data."""
    text = resources.files("mitigator").joinpath("data/default.cmp").read_text("utf-8")
    return PolicySource(text=text, origin="builtin")


def load_program(path_or_builtin: str) -> PolicyProgram:
    """Convenience: 'builtin' or a .cmp file path to a compiled program."""
    if path_or_builtin == "builtin":
        source = builtin_default()
    else:
        with open(path_or_builtin, "r", encoding="utf-8") as fh:
            source = PolicySource(fh.read(), origin=path_or_builtin)
    return compile_policy(parse_policy(source), source)
