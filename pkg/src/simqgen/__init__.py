"""Goal-aligned question generation and evaluation for virtual lab simulations."""

from .sim_model import (
    KnowledgeUnit,
    Relationship,
    SimulationRepresentation,
    Violation,
    find_chain,
    ku_graph,
    validate_representation,
)
from .taxonomy import ContextSlice, QuestionFormat, QuestionType, context_for, supported_types
from .prompts import PromptPackage, TelerLevel, build_prompt, schema_for
from .parsing import (
    FailureCode,
    ParsedQuestion,
    ValidityAggregate,
    ValidityObservation,
    ValidityRecord,
    extract_json,
    parse_question,
    score_validity,
)
from .judging import (
    CRITERIA,
    QualityAggregate,
    QualityRating,
    aggregate as aggregate_quality,
    krippendorff_alpha,
    parse_rating,
    rubric_prompt,
)
from .gateway import Gateway, ModelConfig, RawGeneration, TransportStatus
from .dialogue import (
    DialogueSession,
    DraftRepresentation,
    EditCommand,
    GUIDED_PROMPTS,
    apply_teacher_edits,
    extract_structure,
    record_answer,
    start_session,
)
from .bench import Conversation, RunPlan, aggregate as aggregate_run, execute, make_plan, render_report

__all__ = [
    "KnowledgeUnit",
    "Relationship",
    "SimulationRepresentation",
    "Violation",
    "find_chain",
    "ku_graph",
    "validate_representation",
    "ContextSlice",
    "QuestionFormat",
    "QuestionType",
    "context_for",
    "supported_types",
    "PromptPackage",
    "TelerLevel",
    "build_prompt",
    "schema_for",
    "FailureCode",
    "ParsedQuestion",
    "ValidityAggregate",
    "ValidityObservation",
    "ValidityRecord",
    "extract_json",
    "parse_question",
    "score_validity",
    "CRITERIA",
    "QualityAggregate",
    "QualityRating",
    "aggregate_quality",
    "krippendorff_alpha",
    "parse_rating",
    "rubric_prompt",
    "Gateway",
    "ModelConfig",
    "RawGeneration",
    "TransportStatus",
    "DialogueSession",
    "DraftRepresentation",
    "EditCommand",
    "GUIDED_PROMPTS",
    "apply_teacher_edits",
    "extract_structure",
    "record_answer",
    "start_session",
    "Conversation",
    "RunPlan",
    "aggregate_run",
    "execute",
    "make_plan",
    "render_report",
]
