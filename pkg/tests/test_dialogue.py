from __future__ import annotations

import json
import time

import pytest

from simqgen.dialogue import (
    DraftRepresentation,
    EditCommand,
    GUIDED_PROMPTS,
    SessionStatus,
    apply_teacher_edits,
    extract_structure,
    extraction_prompt,
    push_prompt,
    record_answer,
    session_from_json_dict,
    skip_prompt,
    start_session,
    with_status,
)
from simqgen.errors import (
    EditConflictError,
    EmptyAnswerError,
    ExtractionUnparsableError,
    GatewayError,
    InvalidTransitionError,
    NoPendingPromptError,
    SessionClosedError,
    ValidationFailedError,
)
from simqgen.gateway import ModelConfig, RawGeneration, TransportStatus
from simqgen.sim_model import KnowledgeUnit, Relationship, validate_representation

MOCK_CFG = ModelConfig(model_id="stub", endpoint_url="mock://model")


class _StubGateway:
    """Returns canned raw texts in order; records how many calls were made."""

    def __init__(self, responses: list[str | None]):
        self.responses = list(responses)
        self.calls = 0

    def complete(self, prompt_text: str, cfg: ModelConfig) -> RawGeneration:
        self.calls += 1
        text = self.responses.pop(0) if self.responses else self.responses_exhausted()
        status = TransportStatus.ok if text is not None else TransportStatus.connect_error
        return RawGeneration(
            model_id=cfg.model_id,
            prompt_digest="d",
            raw_text=text,
            started_at=time.time(),
            finished_at=time.time(),
            transport_status=status,
        )

    def responses_exhausted(self):
        raise AssertionError("stub gateway ran out of responses")


def _answered_session():
    session = start_session("sim-1", "Gas Law Lab")
    session = record_answer(session, "ideal gas behavior", at="t0")
    session = record_answer(session, "they know about particles", at="t1")
    session = record_answer(session, "connect cause and effect", at="t2")
    return session


def test_start_session_queues_three_guided_prompts() -> None:
    session = start_session("sim-1", "Gas Law Lab")
    assert session.status is SessionStatus.open
    assert session.queue == GUIDED_PROMPTS
    assert session.queue[0] == (
        "What are the key concepts or phenomena you want students to explore in this simulation?"
    )
    assert session.queue[1] == "What prior knowledge do students bring into the activity?"
    assert session.queue[2] == "What kinds of reasoning or analysis should students practice?"


def test_record_answer_appends_turn() -> None:
    session = start_session("sim-1", "Gas Law Lab")
    updated = record_answer(session, "ideal gas behavior")
    assert len(updated.turns) == len(session.turns) + 1
    assert updated.turns[-1].prompt == GUIDED_PROMPTS[0]
    assert updated.queue == GUIDED_PROMPTS[1:]


def test_committed_session_rejects_answers() -> None:
    session = _answered_session()
    session = with_status(session, SessionStatus.extracting)
    session = with_status(session, SessionStatus.review)
    session = with_status(session, SessionStatus.committed)
    with pytest.raises(SessionClosedError):
        record_answer(session, "anything")


def test_whitespace_answer_rejected() -> None:
    session = start_session("sim-1", "Gas Law Lab")
    with pytest.raises(EmptyAnswerError):
        record_answer(session, "   \n\t")


def test_exhausted_queue_rejects_answers() -> None:
    session = _answered_session()
    with pytest.raises(NoPendingPromptError):
        record_answer(session, "one more")


def test_skip_records_flagged_empty_turn() -> None:
    session = skip_prompt(start_session("sim-1", "Gas Law Lab"))
    assert session.turns[-1].skipped
    assert session.turns[-1].answer == ""
    assert session.answered_turns() == ()


def test_push_prompt_appends_follow_up() -> None:
    session = push_prompt(start_session("sim-1", "Gas Law Lab"), "Which misconception worries you most?")
    assert session.queue[-1] == "Which misconception worries you most?"


def test_status_transitions_forward_only() -> None:
    session = _answered_session()
    session = with_status(session, SessionStatus.extracting)
    session = with_status(session, SessionStatus.extracting)  # re-entry allowed
    session = with_status(session, SessionStatus.review)
    with pytest.raises(InvalidTransitionError):
        with_status(session, SessionStatus.open)


def test_session_roundtrips_through_json() -> None:
    session = _answered_session()
    assert session_from_json_dict(session.to_json_dict()) == session


EXTRACTION_FIXTURE = json.dumps(
    {
        "knowledge_units": [
            {"name": "temperature", "description": "heat level", "kind": "input", "source_turn": 0},
            {"name": "pressure", "description": "wall force", "kind": "output", "source_turn": 2},
        ],
        "relationships": [
            {
                "label": "heating raises pressure",
                "description": "more heat, more pressure",
                "members": ["temperature", "pressure"],
                "directed": True,
                "source_turn": 2,
            }
        ],
    }
)


def test_extract_structure_maps_fixture_to_expected_draft() -> None:
    session = _answered_session()
    gateway = _StubGateway([EXTRACTION_FIXTURE])
    draft = extract_structure(session, gateway, MOCK_CFG)
    expected_base_kus = (
        KnowledgeUnit("ku-1", "temperature", "heat level", "input"),
        KnowledgeUnit("ku-2", "pressure", "wall force", "output"),
    )
    expected_rel = Relationship(
        "rel-1", "heating raises pressure", "more heat, more pressure", ("ku-1", "ku-2"), True
    )
    assert draft.base.knowledge_units == expected_base_kus
    assert draft.base.relationships == (expected_rel,)
    assert draft.base.instruction_goals == (
        "- ideal gas behavior\n- they know about particles\n- connect cause and effect"
    )
    assert draft.provenance == {"ku-1": 0, "ku-2": 2, "rel-1": 2}
    assert validate_representation(draft.base) == []
    assert gateway.calls == 1


def test_extract_structure_prompt_demands_canonical_shape() -> None:
    session = _answered_session()
    text = extraction_prompt(session)
    assert "sim.extraction.v1" in text
    assert "knowledge_units" in text and "relationships" in text
    assert "ideal gas behavior" in text


def test_extract_structure_retries_once_then_fails() -> None:
    session = _answered_session()
    gateway = _StubGateway(["no json here", "still prose"])
    with pytest.raises(ExtractionUnparsableError):
        extract_structure(session, gateway, MOCK_CFG)
    assert gateway.calls == 2


def test_extract_structure_recovers_on_retry() -> None:
    session = _answered_session()
    gateway = _StubGateway(["not json", EXTRACTION_FIXTURE])
    draft = extract_structure(session, gateway, MOCK_CFG)
    assert len(draft.base.knowledge_units) == 2
    assert gateway.calls == 2


def test_extract_structure_requires_answers() -> None:
    session = skip_prompt(start_session("sim-1", "Gas Law Lab"))
    with pytest.raises(EmptyAnswerError):
        extract_structure(session, _StubGateway([]), MOCK_CFG)


def test_extract_structure_surfaces_transport_failure() -> None:
    session = _answered_session()
    with pytest.raises(GatewayError):
        extract_structure(session, _StubGateway([None]), MOCK_CFG)


def test_extract_structure_unknown_member_name_fails() -> None:
    bad = json.dumps(
        {
            "knowledge_units": [{"name": "temperature", "kind": "input"}],
            "relationships": [{"label": "x", "members": ["temperature", "volume"], "directed": False}],
        }
    )
    session = _answered_session()
    with pytest.raises(ExtractionUnparsableError):
        extract_structure(session, _StubGateway([bad, bad]), MOCK_CFG)


def _draft() -> DraftRepresentation:
    session = _answered_session()
    return extract_structure(session, _StubGateway([EXTRACTION_FIXTURE]), MOCK_CFG)


def test_delete_referenced_ku_without_cascade_conflicts() -> None:
    with pytest.raises(EditConflictError):
        apply_teacher_edits(_draft(), [EditCommand(op="delete_ku", target_id="ku-1")])


def test_delete_referenced_ku_with_cascade_drops_relationship() -> None:
    committed = apply_teacher_edits(_draft(), [EditCommand(op="delete_ku", target_id="ku-1", cascade=True)])
    assert [ku.id for ku in committed.knowledge_units] == ["ku-2"]
    assert committed.relationships == ()


def test_rename_preserves_ids() -> None:
    committed = apply_teacher_edits(
        _draft(), [EditCommand(op="update_ku", target_id="ku-1", fields={"name": "gas temperature"})]
    )
    assert committed.knowledge_units[0].id == "ku-1"
    assert committed.knowledge_units[0].name == "gas temperature"


def test_add_relationship_between_existing_kus() -> None:
    committed = apply_teacher_edits(
        _draft(),
        [
            EditCommand(
                op="add_relationship",
                fields={"label": "pair", "members": ["ku-1", "ku-2"], "directed": False},
            )
        ],
    )
    assert len(committed.relationships) == 2
    assert committed.relationships[1].id == "rel-2"


def test_add_relationship_with_unknown_member_fails_validation() -> None:
    with pytest.raises(ValidationFailedError):
        apply_teacher_edits(
            _draft(),
            [EditCommand(op="add_relationship", fields={"label": "x", "members": ["ku-1", "ku-9"]})],
        )


def test_unknown_edit_target_fails() -> None:
    with pytest.raises(ValidationFailedError):
        apply_teacher_edits(_draft(), [EditCommand(op="update_ku", target_id="ku-9", fields={"name": "x"})])


def test_commit_is_lossless_against_provenance_and_edits() -> None:
    draft = _draft()
    edits = [
        EditCommand(op="add_ku", fields={"name": "volume", "kind": "observable"}),
        EditCommand(op="add_relationship", fields={"label": "pv", "members": ["ku-2", "ku-3"]}),
    ]
    committed = apply_teacher_edits(draft, edits)
    known = set(draft.provenance)
    created = {"ku-3", "rel-2"}
    for element_id in [ku.id for ku in committed.knowledge_units] + [r.id for r in committed.relationships]:
        assert element_id in known or element_id in created
