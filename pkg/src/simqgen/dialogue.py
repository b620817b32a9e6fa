"""Teacher dialogue: guided goal elicitation, structure extraction, and
teacher-controlled edits leading to a committed representation.

The dialogue is a structured wizard, not open chat: three fixed guided
prompts seed the queue, the caller may append follow-ups, and every committed
element is traceable to the turn or edit that produced it. Extraction makes
exactly one model call plus one retry on parse failure — errors surface
instead of looping, because silent retries hide exactly the reliability
problems this workflow needs to expose.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping

from .errors import (
    EditConflictError,
    EmptyAnswerError,
    ExtractionUnparsableError,
    GatewayError,
    InvalidTransitionError,
    NoPendingPromptError,
    SessionClosedError,
    ValidationFailedError,
)
from .gateway import Gateway, ModelConfig
from .mock_model import EXTRACTION_SCHEMA_ID
from .parsing import ParseFailure, extract_json
from .sim_model import (
    KU_KINDS,
    KnowledgeUnit,
    Relationship,
    SimulationRepresentation,
    validate_representation,
    with_next_ids,
)

GUIDED_PROMPTS: tuple[str, ...] = (
    "What are the key concepts or phenomena you want students to explore in this simulation?",
    "What prior knowledge do students bring into the activity?",
    "What kinds of reasoning or analysis should students practice?",
)


class SessionStatus(str, Enum):
    open = "open"
    extracting = "extracting"
    review = "review"
    committed = "committed"


_STATUS_ORDER = [SessionStatus.open, SessionStatus.extracting, SessionStatus.review, SessionStatus.committed]


@dataclass(frozen=True)
class DialogueTurn:
    prompt: str
    answer: str
    at: str
    skipped: bool = False


@dataclass(frozen=True)
class DialogueSession:
    session_id: str
    sim_ref: str
    title: str
    turns: tuple[DialogueTurn, ...] = ()
    queue: tuple[str, ...] = GUIDED_PROMPTS
    status: SessionStatus = SessionStatus.open

    def answered_turns(self) -> tuple[DialogueTurn, ...]:
        return tuple(t for t in self.turns if not t.skipped)

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "sim_ref": self.sim_ref,
            "title": self.title,
            "turns": [
                {"prompt": t.prompt, "answer": t.answer, "at": t.at, "skipped": t.skipped}
                for t in self.turns
            ],
            "queue": list(self.queue),
            "status": self.status.value,
        }


def session_from_json_dict(doc: dict) -> DialogueSession:
    return DialogueSession(
        session_id=doc["session_id"],
        sim_ref=doc["sim_ref"],
        title=doc.get("title", ""),
        turns=tuple(
            DialogueTurn(t["prompt"], t["answer"], t["at"], t.get("skipped", False))
            for t in doc.get("turns", [])
        ),
        queue=tuple(doc.get("queue", [])),
        status=SessionStatus(doc.get("status", "open")),
    )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def start_session(sim_id: str, title: str, session_id: str | None = None) -> DialogueSession:
    """Open a session with the three guided prompts queued in fixed order."""
    if not sim_id.strip():
        raise ValueError("sim_id must be non-empty")
    return DialogueSession(
        session_id=session_id or uuid.uuid4().hex,
        sim_ref=sim_id,
        title=title,
    )


def record_answer(session: DialogueSession, answer_text: str, at: str | None = None) -> DialogueSession:
    """Append (pending prompt, answer) and dequeue the next prompt."""
    if session.status is not SessionStatus.open:
        raise SessionClosedError(f"session is {session.status.value}, not open")
    if not session.queue:
        raise NoPendingPromptError("no prompt is pending")
    if not answer_text.strip():
        raise EmptyAnswerError("answer is empty; use skip_prompt to skip explicitly")
    turn = DialogueTurn(prompt=session.queue[0], answer=answer_text, at=at or _now())
    return replace(session, turns=session.turns + (turn,), queue=session.queue[1:])


def skip_prompt(session: DialogueSession, at: str | None = None) -> DialogueSession:
    """Skip the pending prompt, recording a flagged empty-answer turn."""
    if session.status is not SessionStatus.open:
        raise SessionClosedError(f"session is {session.status.value}, not open")
    if not session.queue:
        raise NoPendingPromptError("no prompt is pending")
    turn = DialogueTurn(prompt=session.queue[0], answer="", at=at or _now(), skipped=True)
    return replace(session, turns=session.turns + (turn,), queue=session.queue[1:])


def push_prompt(session: DialogueSession, prompt_text: str) -> DialogueSession:
    """Append a caller-supplied follow-up prompt to the queue."""
    if session.status is not SessionStatus.open:
        raise SessionClosedError(f"session is {session.status.value}, not open")
    return replace(session, queue=session.queue + (prompt_text,))


def with_status(session: DialogueSession, status: SessionStatus) -> DialogueSession:
    """Move the session forward; transitions only run open -> extracting ->
    review -> committed (re-entering the current state is allowed)."""
    if _STATUS_ORDER.index(status) < _STATUS_ORDER.index(session.status):
        raise InvalidTransitionError(f"cannot move from {session.status.value} back to {status.value}")
    return replace(session, status=status)


@dataclass(frozen=True)
class DraftRepresentation:
    """Extraction output awaiting teacher review; never committed directly."""

    base: SimulationRepresentation
    provenance: Mapping[str, int]
    confidence_notes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        from .sim_model import to_json_dict

        return {
            "base": to_json_dict(self.base),
            "provenance": dict(self.provenance),
            "confidence_notes": list(self.confidence_notes),
        }


EXTRACTION_TEMPLATE = (
    "Read a teacher's answers about a lab simulation and extract its structure.\n\n"
    "Teacher answers:\n{transcript}\n\n"
    "Identify the concepts, variables, or skills the teacher cares about (knowledge units) and the"
    " links among them (relationships). Each knowledge unit needs a name, a one-line description,"
    " and a kind: input, output, constant, or observable. Each relationship needs a label, a"
    " description, the member knowledge-unit names in order (two or more), whether it is directed,"
    " and the 0-based index of the answer it came from (source_turn; also set source_turn on each"
    " knowledge unit).\n\n"
    'Output: return a single JSON object matching schema "' + EXTRACTION_SCHEMA_ID + '" exactly:\n'
    '{{"knowledge_units": [{{"name": "<name>", "description": "<text>", "kind": "<kind>",'
    ' "source_turn": <n>}}], "relationships": [{{"label": "<label>", "description": "<text>",'
    ' "members": ["<name>", "<name>"], "directed": <true or false>, "source_turn": <n>}}]}}\n'
    "Return only the JSON object, with no surrounding text."
)


def extraction_prompt(session: DialogueSession) -> str:
    transcript = "\n".join(
        f"{i}. Q: {t.prompt}\n   A: {t.answer}" for i, t in enumerate(session.answered_turns())
    )
    return EXTRACTION_TEMPLATE.format(transcript=transcript)


def _summarize_goals(session: DialogueSession) -> str:
    return "\n".join(f"- {t.answer}" for t in session.answered_turns())


def _map_extraction(session: DialogueSession, value: dict) -> DraftRepresentation:
    """Map model output onto a draft; raises ValueError when unmappable."""
    if not isinstance(value, dict):
        raise ValueError("extraction output is not an object")
    raw_kus = value.get("knowledge_units")
    if not isinstance(raw_kus, list) or not raw_kus:
        raise ValueError("no knowledge units extracted")
    n_turns = len(session.answered_turns())
    notes: list[str] = []
    provenance: dict[str, int] = {}
    kus: list[KnowledgeUnit] = []
    id_by_name: dict[str, str] = {}
    for i, raw in enumerate(raw_kus, start=1):
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str) or not raw["name"].strip():
            raise ValueError("a knowledge unit lacks a name")
        kind = raw.get("kind")
        if kind not in KU_KINDS:
            notes.append(f"kind defaulted to observable for {raw['name']!r}")
            kind = "observable"
        ku_id = f"ku-{i}"
        kus.append(
            KnowledgeUnit(
                id=ku_id,
                name=raw["name"].strip(),
                description=str(raw.get("description", "")),
                kind=kind,
            )
        )
        id_by_name[raw["name"].strip()] = ku_id
        provenance[ku_id] = _clamp_turn(raw.get("source_turn"), n_turns)

    rels: list[Relationship] = []
    for i, raw in enumerate(value.get("relationships", []) or [], start=1):
        if not isinstance(raw, dict):
            raise ValueError("a relationship is not an object")
        members = raw.get("members")
        if not isinstance(members, list):
            raise ValueError("a relationship lacks members")
        member_ids = []
        for name in members:
            if name not in id_by_name:
                raise ValueError(f"relationship references unknown knowledge unit {name!r}")
            member_ids.append(id_by_name[name])
        rel_id = f"rel-{i}"
        rels.append(
            Relationship(
                id=rel_id,
                label=str(raw.get("label", "")) or f"relationship {i}",
                description=str(raw.get("description", "")),
                members=tuple(member_ids),
                directed=bool(raw.get("directed", False)),
            )
        )
        provenance[rel_id] = _clamp_turn(raw.get("source_turn"), n_turns)

    base = SimulationRepresentation(
        sim_id=session.sim_ref,
        title=session.title,
        instruction_goals=_summarize_goals(session),
        knowledge_units=tuple(kus),
        relationships=tuple(rels),
    )
    violations = validate_representation(base)
    if violations:
        raise ValueError("extracted structure is invalid: " + "; ".join(v.code for v in violations))
    return DraftRepresentation(base=base, provenance=provenance, confidence_notes=tuple(notes))


def _clamp_turn(value, n_turns: int) -> int:
    if isinstance(value, int) and not isinstance(value, bool) and 0 <= value < n_turns:
        return value
    return 0


def extract_structure(session: DialogueSession, gateway: Gateway, cfg: ModelConfig) -> DraftRepresentation:
    """One model call (plus one retry on parse failure) mapping the transcript
    into a draft representation.

    Transport failures raise GatewayError; output that cannot be mapped after
    the retry raises ExtractionUnparsableError.
    """
    if not session.answered_turns():
        raise EmptyAnswerError("session has no answered turns")
    prompt = extraction_prompt(session)
    last_problem = ""
    for _ in range(2):
        raw = gateway.complete(prompt, cfg)
        if not raw.ok:
            raise GatewayError(f"extraction transport failed: {raw.transport_status.value} {raw.detail}")
        value = extract_json(raw.raw_text)
        if isinstance(value, ParseFailure):
            last_problem = value.code.value
            continue
        try:
            return _map_extraction(session, value)
        except ValueError as exc:
            last_problem = str(exc)
    raise ExtractionUnparsableError(f"extraction failed after one retry: {last_problem}")


@dataclass(frozen=True)
class EditCommand:
    """One teacher edit: add, update, or delete a knowledge unit or relationship.

    ``fields`` carries the attributes being set; deletes of a referenced
    knowledge unit require cascade=True, which drops it from member lists
    (and drops relationships left with fewer than two members).
    """

    op: str  # add_ku | update_ku | delete_ku | add_relationship | update_relationship | delete_relationship
    target_id: str | None = None
    fields: Mapping = field(default_factory=dict)
    cascade: bool = False


def apply_teacher_edits(draft: DraftRepresentation, edits: list[EditCommand]) -> SimulationRepresentation:
    """Apply edits to the draft and commit; referential integrity re-validated.

    Ids are stable across renames; new elements get fresh system-assigned ids.
    """
    kus = list(draft.base.knowledge_units)
    rels = list(draft.base.relationships)
    next_ku, next_rel = with_next_ids(draft.base)

    for edit in edits:
        if edit.op == "add_ku":
            kus.append(
                KnowledgeUnit(
                    id=f"ku-{next_ku}",
                    name=str(edit.fields.get("name", "")),
                    description=str(edit.fields.get("description", "")),
                    kind=str(edit.fields.get("kind", "observable")),
                )
            )
            next_ku += 1
        elif edit.op == "update_ku":
            idx = _index_of(kus, edit.target_id)
            allowed = {k: v for k, v in edit.fields.items() if k in ("name", "description", "kind")}
            kus[idx] = replace(kus[idx], **allowed)
        elif edit.op == "delete_ku":
            idx = _index_of(kus, edit.target_id)
            referencing = [r for r in rels if edit.target_id in r.members]
            if referencing and not edit.cascade:
                raise EditConflictError(
                    f"knowledge unit {edit.target_id!r} is referenced by "
                    + ", ".join(r.id for r in referencing)
                )
            del kus[idx]
            if referencing:
                survivors = []
                for r in rels:
                    if edit.target_id not in r.members:
                        survivors.append(r)
                        continue
                    members = tuple(m for m in r.members if m != edit.target_id)
                    if len(members) >= 2:
                        survivors.append(replace(r, members=members))
                    # else the relationship dissolves with the cascade
                rels = survivors
        elif edit.op == "add_relationship":
            members = tuple(edit.fields.get("members", ()))
            rels.append(
                Relationship(
                    id=f"rel-{next_rel}",
                    label=str(edit.fields.get("label", "")),
                    description=str(edit.fields.get("description", "")),
                    members=members,
                    directed=bool(edit.fields.get("directed", False)),
                )
            )
            next_rel += 1
        elif edit.op == "update_relationship":
            idx = _index_of(rels, edit.target_id)
            allowed = {k: v for k, v in edit.fields.items() if k in ("label", "description", "members", "directed")}
            if "members" in allowed:
                allowed["members"] = tuple(allowed["members"])
            rels[idx] = replace(rels[idx], **allowed)
        elif edit.op == "delete_relationship":
            idx = _index_of(rels, edit.target_id)
            del rels[idx]
        else:
            raise ValidationFailedError(message=f"unknown edit op {edit.op!r}")

    committed = replace(draft.base, knowledge_units=tuple(kus), relationships=tuple(rels))
    violations = validate_representation(committed)
    if violations:
        raise ValidationFailedError(violations)
    return committed


def _index_of(elements: list, target_id: str | None) -> int:
    for i, element in enumerate(elements):
        if element.id == target_id:
            return i
    raise ValidationFailedError(message=f"no element with id {target_id!r}")
