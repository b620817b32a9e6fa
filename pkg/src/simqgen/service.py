"""HTTP service exposing the teacher workflow: sessions, extraction, edits,
generation, judging, and run reports. Stateless apart from the store; every
response error carries the originating module's machine-readable code.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import dialogue
from .bench import DimensionReport, aggregate, render_report, report_tables
from .canonical import sha256_hex, stable_seed
from .config import AppConfig
from .errors import (
    EditConflictError,
    EmptyStoreError,
    ExtractionUnparsableError,
    GatewayError,
    InvalidRepresentationError,
    InvalidTransitionError,
    NoPendingPromptError,
    SessionClosedError,
    SimQGenError,
    StoreError,
    UnknownIdError,
    ValidationFailedError,
)
from .gateway import Gateway, QuestionBundle
from .judging import QualityRating, aggregate as aggregate_quality, parse_rating, rubric_prompt
from .parsing import ParsedQuestion, classify
from .prompts import TelerLevel, build_prompt
from .sim_model import from_json_dict, to_json_dict, validate_representation
from .store import AppStore
from .taxonomy import QuestionFormat, QuestionType, context_for, slice_from_json_dict, supported_types

_STATUS_BY_CODE = {
    UnknownIdError.code: 404,
    SessionClosedError.code: 409,
    InvalidTransitionError.code: 409,
    EditConflictError.code: 409,
    NoPendingPromptError.code: 409,
    GatewayError.code: 502,
    ExtractionUnparsableError.code: 502,
    StoreError.code: 500,
}


class SessionCreate(BaseModel):
    sim_id: str
    title: str = ""


class AnswerBody(BaseModel):
    answer: str = ""
    skip: bool = False


class ExtractBody(BaseModel):
    model: Optional[str] = None


class EditBody(BaseModel):
    op: str
    target_id: Optional[str] = None
    fields: dict = Field(default_factory=dict)
    cascade: bool = False


class CommitBody(BaseModel):
    edits: list[EditBody] = Field(default_factory=list)


class GenerateBody(BaseModel):
    qtype: str
    format: str
    level: str = "L3"
    model: Optional[str] = None
    seed: Optional[int] = None


class JudgeBody(BaseModel):
    judges: Optional[list[str]] = None


def create_app(config: AppConfig, store: AppStore, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="simqgen service", openapi_url="/spec")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")
    gateway = Gateway(mode="interactive", max_in_flight=config.parallelism)
    session_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return session_locks.setdefault(session_id, threading.Lock())

    @app.exception_handler(SimQGenError)
    async def domain_error_handler(request: Request, exc: SimQGenError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"error": {"code": exc.code, "message": str(exc)}})

    def load_session(session_id: str) -> dialogue.DialogueSession:
        return dialogue.session_from_json_dict(store.get("sessions", session_id))

    def save_session(session: dialogue.DialogueSession) -> None:
        store.put("sessions", session.session_id, session.to_json_dict())

    def session_view(session: dialogue.DialogueSession) -> dict:
        doc = session.to_json_dict()
        doc["next_prompt"] = session.queue[0] if session.queue else None
        return doc

    @app.post("/sessions")
    def create_session(body: SessionCreate):
        if not body.sim_id.strip():
            raise ValidationFailedError(message="sim_id must be non-empty")
        session = dialogue.start_session(body.sim_id, body.title)
        save_session(session)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(load_session(session_id))

    @app.post("/sessions/{session_id}/answers")
    def answer_session(session_id: str, body: AnswerBody):
        with session_lock(session_id):
            session = load_session(session_id)
            if body.skip:
                session = dialogue.skip_prompt(session)
            else:
                session = dialogue.record_answer(session, body.answer)
            save_session(session)
            return session_view(session)

    @app.post("/sessions/{session_id}/extract")
    def extract_session(session_id: str, body: ExtractBody):
        with session_lock(session_id):
            session = load_session(session_id)
            if session.status not in (dialogue.SessionStatus.open, dialogue.SessionStatus.extracting):
                raise InvalidTransitionError(f"cannot extract a {session.status.value} session")
            cfg = config.model(body.model) if body.model else config.models[0]
            session = dialogue.with_status(session, dialogue.SessionStatus.extracting)
            save_session(session)
            draft = dialogue.extract_structure(session, gateway, cfg)
            session = dialogue.with_status(session, dialogue.SessionStatus.review)
            save_session(session)
            doc = draft.to_json_dict()
            doc["session_id"] = session_id
            store.put("drafts", session.sim_ref, doc)
            return doc

    @app.put("/sims/{sim_id}")
    def commit_sim(sim_id: str, body: CommitBody):
        draft_doc = store.get("drafts", sim_id)
        draft = dialogue.DraftRepresentation(
            base=from_json_dict(draft_doc["base"], strict=False),
            provenance=draft_doc.get("provenance", {}),
            confidence_notes=tuple(draft_doc.get("confidence_notes", [])),
        )
        edits = [
            dialogue.EditCommand(op=e.op, target_id=e.target_id, fields=e.fields, cascade=e.cascade)
            for e in body.edits
        ]
        committed = dialogue.apply_teacher_edits(draft, edits)
        store.put("sims", sim_id, to_json_dict(committed))
        session_id = draft_doc.get("session_id")
        if session_id and store.exists("sessions", session_id):
            with session_lock(session_id):
                session = load_session(session_id)
                session = dialogue.with_status(session, dialogue.SessionStatus.committed)
                save_session(session)
        return to_json_dict(committed)

    @app.get("/sims/{sim_id}")
    def get_sim(sim_id: str):
        return store.get("sims", sim_id)

    @app.get("/sims/{sim_id}/types")
    def get_supported_types(sim_id: str):
        rep = from_json_dict(store.get("sims", sim_id), strict=False)
        return {"supported_types": sorted(t.value for t in supported_types(rep))}

    @app.post("/sims/{sim_id}/questions")
    def generate_question(sim_id: str, body: GenerateBody):
        rep = from_json_dict(store.get("sims", sim_id), strict=False)
        violations = validate_representation(rep)
        if violations:
            raise InvalidRepresentationError(violations)
        try:
            qtype = QuestionType(body.qtype)
            fmt = QuestionFormat(body.format)
            level = TelerLevel(body.level)
        except ValueError as exc:
            raise ValidationFailedError(message=str(exc)) from exc
        cfg = config.model(body.model) if body.model else config.models[0]
        seed = body.seed if body.seed is not None else stable_seed(sim_id, qtype.value, level.value)
        slice = context_for(rep, qtype, seed)
        pkg = build_prompt(slice, fmt, level)
        raw = gateway.generate(pkg, cfg)
        question_id = "q-" + uuid.uuid4().hex[:12]
        doc = {
            "question_id": question_id,
            "sim_ref": sim_id,
            "qtype": qtype.value,
            "format": fmt.value,
            "level": level.value,
            "model": cfg.model_id,
            "seed": seed,
            "slice": slice.to_json_dict(),
            "prompt_digest": sha256_hex(pkg.prompt_text),
            "transport_status": raw.transport_status.value,
            "validity": None,
            "payload": None,
            "status": "transport_failed",
        }
        if not raw.ok:
            store.put("questions", question_id, doc)
            raise GatewayError(f"generation transport failed: {raw.transport_status.value}")
        validity, question = classify(raw.raw_text, fmt)
        doc["validity"] = {
            "json_ok": validity.json_ok,
            "format_ok": validity.format_ok,
            "failure": validity.failure.value if validity.failure else None,
        }
        doc["payload"] = dict(question.payload) if question else None
        doc["status"] = "ok" if validity.fully_valid() else "invalid"
        store.put("questions", question_id, doc)
        return doc

    @app.get("/questions/{question_id}")
    def get_question(question_id: str):
        return store.get("questions", question_id)

    @app.post("/questions/{question_id}/judge")
    def judge_question(question_id: str, body: JudgeBody):
        doc = store.get("questions", question_id)
        if doc.get("payload") is None:
            raise ValidationFailedError(message="question is not structurally valid; nothing to judge")
        question = ParsedQuestion(format=QuestionFormat(doc["format"]), payload=doc["payload"])
        slice = slice_from_json_dict(doc["slice"])
        prompt_text, _ = rubric_prompt(question, slice)
        bundle = QuestionBundle(question=question, slice=slice, rubric_prompt=prompt_text)
        judge_names = body.judges if body.judges else [j.model_id for j in config.judges]
        ratings = []
        failures = []
        for name in judge_names:
            cfg = config.judge(name)
            raw = gateway.judge_rate(bundle, cfg)
            if not raw.ok:
                failures.append({"judge_id": name, "failure": raw.transport_status.value})
                continue
            rating = parse_rating(raw.raw_text, cfg.model_id, question_id)
            if isinstance(rating, QualityRating):
                ratings.append(rating)
            else:
                failures.append({"judge_id": name, "failure": rating.code.value})
        result: dict = {
            "question_id": question_id,
            "ratings": [{"judge_id": r.judge_id, "scores": dict(r.scores)} for r in ratings],
            "failures": failures,
        }
        if ratings:
            agg = aggregate_quality(ratings)
            result["aggregate"] = {
                "per_criterion_mean": dict(agg.per_criterion_mean),
                "composite": agg.composite,
                "alpha": agg.alpha,
                "n_judges": agg.n_judges,
            }
        doc["judgement"] = result
        store.put("questions", question_id, doc)
        return result

    @app.get("/runs/{plan_id}/report")
    def run_report(plan_id: str, group_by: str = "model"):
        run_store = store.run_store(plan_id)
        try:
            report = aggregate(run_store, group_by)
        except ValueError as exc:
            raise ValidationFailedError(message=str(exc)) from exc
        except EmptyStoreError:
            raise UnknownIdError(f"no records for run {plan_id!r}")
        return _report_doc(report)

    return app


def _report_doc(report: DimensionReport) -> dict:
    def table_doc(table) -> dict | None:
        if table is None:
            return None
        return {
            "title": table.title,
            "key_header": table.key_header,
            "columns": list(table.columns),
            "rows": [[label, list(values)] for label, values in table.rows],
        }

    return {
        "dimension": report.dimension,
        "validity": table_doc(report.validity),
        "quality": table_doc(report.quality),
        "markdown": render_report(report_tables(report), "markdown"),
    }
