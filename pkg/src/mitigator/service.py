"""HTTP+JSON session service for live (wizard-of-oz) operation.

Sessions are held in memory and lost on restart; pass a journal directory
to keep harness-replayable JSONL logs. All operations on one session are
serialized behind a per-session lock; the event stream endpoint is a
read-only observer using server-sent events.
"""

from __future__ import annotations

import asyncio
import json
import os
import secrets
import threading
import time
from typing import Dict, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .acts import DialogueAct, DialogueActType
from .dsl import (
    ParseError,
    PolicySource,
    builtin_default,
    compile_policy,
    parse_policy,
    validate_program,
)
from .engine import (
    ActAfterEnd,
    EngineError,
    MissingInduction,
    NoObservation,
    Observation,
    ObservationAfterEnd,
    ObservationSource,
    Session,
)
from .harness import event_to_dict
from .model import (
    ConfusionAssessment,
    ConfusionLevel,
    InductionType,
    PersistenceLimits,
    Thresholds,
)


class CreateSessionRequest(BaseModel):
    policy: str = "builtin"  # "builtin" or inline DSL source
    thresholds: Optional[dict] = None
    limits: Optional[dict] = None
    seed: int = 0
    dispatch_mode: str = "subpolicy"
    overrides_advance: bool = False


class ObservationRequest(BaseModel):
    level: float = Field(ge=0.0, le=1.0)
    induction: Optional[str] = None
    source: str = "wizard"


class OverrideActRequest(BaseModel):
    act_type: str
    overridden: bool = True


class ValidateRequest(BaseModel):
    source: str


def _assessment_json(a: ConfusionAssessment) -> dict:
    return {
        "level": a.level.value,
        "zone": a.zone.value,
        "affect": a.affect.value,
        "persistence_turns": a.persistence_turns,
    }


def _act_json(act: DialogueAct, overridden: bool = False) -> dict:
    data = {
        "act_type": act.act_type.value,
        "utterance": act.utterance,
        "step_index": act.step_index,
        "policy_id": act.policy_id,
    }
    if overridden:
        data["overridden"] = True
    return data


class SessionEntry:
    def __init__(self, session: Session, policy_name: str):
        self.session = session
        self.policy_name = policy_name
        self.created_at = time.time()
        self.lock = threading.Lock()
        self.journaled = 0


def create_app(journal_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="confusion-mitigation session service")
    sessions: Dict[str, SessionEntry] = {}
    if journal_dir:
        os.makedirs(journal_dir, exist_ok=True)

    def error(status: int, code: str, detail, **extra):
        body = {"error": code, "detail": detail}
        body.update(extra)
        return JSONResponse(status_code=status, content=body)

    def journal(entry: SessionEntry):
        if not journal_dir:
            return
        events = entry.session.transcript()
        path = os.path.join(journal_dir, f"{entry.session.session_id}.jsonl")
        if entry.journaled == 0:
            header = {
                "policy": entry.policy_name,
                "checksum": entry.session.program.checksum,
                "session_id": entry.session.session_id,
                "seed": entry.session.rng_seed,
            }
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(header, sort_keys=True) + "\n")
        with open(path, "a", encoding="utf-8") as fh:
            for event in events[entry.journaled:]:
                fh.write(json.dumps(event_to_dict(event), sort_keys=True) + "\n")
        entry.journaled = len(events)

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        if req.policy == "builtin":
            source = builtin_default()
        else:
            source = PolicySource(req.policy, origin="inline")
        try:
            ast = parse_policy(source)
        except ParseError as exc:
            return error(400, "invalid_policy", str(exc), diagnostics=[
                {"line": exc.line, "column": exc.column, "message": exc.message}
            ])
        diags = validate_program(ast)
        if diags:
            return error(400, "invalid_policy", "policy has diagnostics", diagnostics=[
                {"line": d.line, "message": d.message} for d in diags
            ])
        program = compile_policy(ast, source)
        try:
            thresholds = Thresholds(**req.thresholds) if req.thresholds else None
            limits = PersistenceLimits(**req.limits) if req.limits else None
            session = Session(
                program,
                thresholds=thresholds,
                limits=limits,
                seed=req.seed,
                session_id=secrets.token_urlsafe(12),
                dispatch_mode=req.dispatch_mode,
                overrides_advance=req.overrides_advance,
            )
        except (TypeError, ValueError) as exc:
            return error(400, "invalid_configuration", str(exc))
        sessions[session.session_id] = SessionEntry(session, ast.name)
        return {
            "session_id": session.session_id,
            "created_at": sessions[session.session_id].created_at,
            "policy_name": ast.name,
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)
        with entry.lock:
            s = entry.session
            return {
                "session_id": s.session_id,
                "policy_name": entry.policy_name,
                "status": s.status.value,
                "end_reason": s.end_reason,
                "thresholds": {"t_a": s.thresholds.t_a, "t_b": s.thresholds.t_b},
                "limits": {
                    "frustration_after": s.limits.frustration_after,
                    "boredom_after": s.limits.boredom_after,
                    "disengage_after": s.limits.disengage_after,
                },
                "assessment": _assessment_json(s.assessment),
            }

    @app.post("/sessions/{session_id}/observations")
    def post_observation(session_id: str, req: ObservationRequest):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)
        try:
            induction = InductionType(req.induction) if req.induction else None
            obs = Observation(
                level=ConfusionLevel(req.level),
                induction=induction,
                source=ObservationSource(req.source),
            )
        except ValueError as exc:
            return error(422, "invalid_observation", str(exc))
        with entry.lock:
            try:
                assessment = entry.session.observe(obs)
            except ObservationAfterEnd as exc:
                return error(409, "observation_after_end", str(exc))
            except MissingInduction as exc:
                return error(422, "missing_induction", str(exc))
            journal(entry)
        return _assessment_json(assessment)

    @app.get("/sessions/{session_id}/next-act")
    def get_next_act(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)
        with entry.lock:
            try:
                act = entry.session.next_act()
            except (NoObservation, ActAfterEnd) as exc:
                code = "no_observation" if isinstance(exc, NoObservation) else "act_after_end"
                return error(409, code, str(exc))
            journal(entry)
        return JSONResponse(content=None if act is None else _act_json(act))

    @app.post("/sessions/{session_id}/acts")
    def post_act(session_id: str, req: OverrideActRequest):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)
        try:
            act_type = DialogueActType(req.act_type)
        except ValueError as exc:
            return error(422, "invalid_act", str(exc))
        with entry.lock:
            try:
                act = entry.session.record_override(act_type)
            except EngineError as exc:
                return error(409, "override_rejected", str(exc))
            journal(entry)
        return _act_json(act, overridden=True)

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)
        with entry.lock:
            return [event_to_dict(e) for e in entry.session.transcript()]

    @app.get("/sessions/{session_id}/events")
    async def stream_events(session_id: str, request: Request, after: int = 0,
                            follow: bool = True):
        entry = sessions.get(session_id)
        if entry is None:
            return error(404, "unknown_session", session_id)

        last_id = request.headers.get("last-event-id")
        cursor = int(last_id) if last_id else after

        async def generate():
            nonlocal cursor
            idle = 0.0
            while True:
                if await request.is_disconnected():
                    return
                with entry.lock:
                    events = entry.session.transcript()
                if cursor < len(events):
                    for i in range(cursor, len(events)):
                        data = json.dumps(event_to_dict(events[i]), sort_keys=True)
                        yield f"id: {i + 1}\nevent: session-event\ndata: {data}\n\n"
                    cursor = len(events)
                    idle = 0.0
                else:
                    if not follow:
                        return
                    idle += 0.1
                    if idle >= 15.0:
                        yield ": keep-alive\n\n"
                        idle = 0.0
                    await asyncio.sleep(0.1)

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/policies/builtin")
    def get_builtin():
        source = builtin_default()
        ast = parse_policy(source)
        return {"name": ast.name, "version": ast.version, "source": source.text}

    @app.post("/policies/validate")
    def validate_policy(req: ValidateRequest):
        try:
            ast = parse_policy(PolicySource(req.source, origin="inline"))
        except ParseError as exc:
            return {
                "valid": False,
                "diagnostics": [
                    {"line": exc.line, "column": exc.column, "message": exc.message}
                ],
            }
        diags = validate_program(ast)
        return {
            "valid": not diags,
            "diagnostics": [{"line": d.line, "message": d.message} for d in diags],
        }

    return app
