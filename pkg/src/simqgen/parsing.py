"""Structural validation of model output: JSON extraction, per-format schema
checks, and the three validity metrics (JSON, format, existence accuracy).

Models wrap JSON in prose, code fences, and apologies, so extraction is a
string-and-escape-aware balanced-brace scan over the first ``{`` rather than a
whole-document parse. Validation failures are data with machine-readable
codes, never exceptions: a benchmark keeps running when a model misbehaves.

Check order inside each format validator is fixed and documented so that a
given defective payload always maps to the same failure code:

1. format-specific probes that identify a known model mistake by shape
   (e.g. ``answer_indices`` supplied to single-answer multiple choice),
2. missing required fields,
3. field types,
4. cardinalities (option counts, list lengths, blank counts),
5. empty text fields,
6. index ranges.

Extra keys are tolerated everywhere; missing keys are fatal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .canonical import sha256_hex
from .errors import EmptyBatchError
from .taxonomy import QuestionFormat

# One blank = one maximal run of >= 4 underscores.
BLANK_MARKER = "____"
BLANK_RE = re.compile(r"_{4,}")


class FailureCode(str, Enum):
    # Structural question failures (the ValidityRecord taxonomy).
    no_json = "no_json"
    malformed_json = "malformed_json"
    schema_mismatch = "schema_mismatch"
    multiple_correct_in_mc = "multiple_correct_in_mc"
    missing_blank = "missing_blank"
    blank_answer_mismatch = "blank_answer_mismatch"
    empty_field = "empty_field"
    index_out_of_range = "index_out_of_range"
    # Judge-rating failures (never appear in ValidityRecord).
    score_out_of_range = "score_out_of_range"
    missing_criterion = "missing_criterion"


@dataclass(frozen=True)
class ParseFailure:
    code: FailureCode
    detail: str = ""


@dataclass(frozen=True)
class FieldSpec:
    name: str
    type_name: str
    cardinality: str = ""


@dataclass(frozen=True)
class SchemaDescriptor:
    """Canonical output schema for one question format.

    ``template`` is the JSON skeleton shown to models; the field names are
    bit-exact contract between prompt construction and validation.
    """

    schema_id: str
    format: QuestionFormat
    fields: tuple[FieldSpec, ...]
    template: str


QUESTION_SCHEMAS: dict[QuestionFormat, SchemaDescriptor] = {
    QuestionFormat.multiple_choice: SchemaDescriptor(
        schema_id="question.multiple_choice.v1",
        format=QuestionFormat.multiple_choice,
        fields=(
            FieldSpec("question", "string"),
            FieldSpec("options", "list of strings", "exactly 4"),
            FieldSpec("answer_index", "integer", "one value in 0..3"),
            FieldSpec("explanation", "string"),
        ),
        template=(
            '{"question": "<question text>", "options": ["<option 1>", "<option 2>", "<option 3>", "<option 4>"],'
            ' "answer_index": <0-3>, "explanation": "<why the answer is correct>"}'
        ),
    ),
    QuestionFormat.multiple_select: SchemaDescriptor(
        schema_id="question.multiple_select.v1",
        format=QuestionFormat.multiple_select,
        fields=(
            FieldSpec("question", "string"),
            FieldSpec("options", "list of strings", "4 to 6"),
            FieldSpec("answer_indices", "list of integers", "at least 1, unique, in range"),
            FieldSpec("explanation", "string"),
        ),
        template=(
            '{"question": "<question text>", "options": ["<option 1>", "<option 2>", "<option 3>", "<option 4>"],'
            ' "answer_indices": [<index>, <index>], "explanation": "<why those answers are correct>"}'
        ),
    ),
    QuestionFormat.true_false: SchemaDescriptor(
        schema_id="question.true_false.v1",
        format=QuestionFormat.true_false,
        fields=(
            FieldSpec("question", "string"),
            FieldSpec("answer", "boolean"),
            FieldSpec("explanation", "string"),
        ),
        template='{"question": "<statement to judge>", "answer": <true or false>, "explanation": "<why>"}',
    ),
    QuestionFormat.fill_in_the_blank: SchemaDescriptor(
        schema_id="question.fill_in_the_blank.v1",
        format=QuestionFormat.fill_in_the_blank,
        fields=(
            FieldSpec("question", "string", "contains ____ once per blank"),
            FieldSpec("answers", "list of strings", "one per blank"),
            FieldSpec("explanation", "string"),
        ),
        template=(
            '{"question": "<sentence with ____ where each answer goes>", "answers": ["<answer for each blank>"],'
            ' "explanation": "<why>"}'
        ),
    ),
    QuestionFormat.free_response_essay: SchemaDescriptor(
        schema_id="question.free_response_essay.v1",
        format=QuestionFormat.free_response_essay,
        fields=(
            FieldSpec("question", "string"),
            FieldSpec("exemplar_points", "list of strings", "at least 1"),
        ),
        template='{"question": "<essay prompt>", "exemplar_points": ["<point a strong answer makes>"]}',
    ),
}

SCHEMAS_BY_ID: dict[str, SchemaDescriptor] = {d.schema_id: d for d in QUESTION_SCHEMAS.values()}


def resolve_schema(schema_id: str) -> SchemaDescriptor:
    return SCHEMAS_BY_ID[schema_id]


@dataclass(frozen=True)
class ParsedQuestion:
    """A structurally valid question; payload holds exactly the schema fields."""

    format: QuestionFormat
    payload: dict
    source_digest: str = ""


@dataclass(frozen=True)
class ValidityRecord:
    """Structural outcome for one generation.

    format_ok is only meaningful when the output parsed as JSON: it must be
    None whenever json_ok is False (parsing is a prerequisite for judging
    format), enforced at construction.
    """

    json_ok: bool
    format_ok: bool | None = None
    failure: FailureCode | None = None

    def __post_init__(self):
        if not self.json_ok and self.format_ok is not None:
            raise ValueError("format_ok must be absent when json_ok is False")

    def fully_valid(self) -> bool:
        return self.json_ok and self.format_ok is True


@dataclass(frozen=True)
class ValidityObservation:
    """One record keyed for aggregation.

    ``group`` is the existence-scoring unit, normally
    (model, conversation, qtype, level); the five formats inside one group
    share a single 0-5 existence score.
    """

    group: tuple
    format: QuestionFormat
    record: ValidityRecord


@dataclass(frozen=True)
class ValidityAggregate:
    json_accuracy: float
    format_accuracy: float | None
    existence_score: float
    n: int


def _strip_code_fences(raw_text: str) -> str:
    lines = [line for line in raw_text.splitlines() if not line.lstrip().startswith("```")]
    return "\n".join(lines)


def _balanced_object_span(text: str, start: int) -> str | None:
    """The substring from ``start`` to the matching close brace, honoring
    JSON string literals and backslash escapes. None if never balanced."""
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def extract_json(raw_text: str):
    """First balanced ``{...}`` span, strictly parsed; prose around it ignored.

    Returns the parsed object or a ParseFailure with code no_json (no object
    start anywhere) or malformed_json (unbalanced or not strict JSON). Total:
    never raises, whatever the input bytes decode to.
    """
    if not isinstance(raw_text, str):
        return ParseFailure(FailureCode.no_json, "no text")
    text = _strip_code_fences(raw_text)
    start = text.find("{")
    if start == -1:
        return ParseFailure(FailureCode.no_json, "no object start found")
    span = _balanced_object_span(text, start)
    if span is None:
        return ParseFailure(FailureCode.malformed_json, "braces never balance")
    try:
        return json.loads(span)
    except json.JSONDecodeError as exc:
        return ParseFailure(FailureCode.malformed_json, str(exc))


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _missing(obj: Mapping, names: Iterable[str]) -> ParseFailure | None:
    absent = [n for n in names if n not in obj]
    if absent:
        return ParseFailure(FailureCode.schema_mismatch, f"missing field(s): {', '.join(absent)}")
    return None


def _text_field(obj: Mapping, name: str) -> ParseFailure | None:
    value = obj[name]
    if not isinstance(value, str):
        return ParseFailure(FailureCode.schema_mismatch, f"{name} must be a string")
    if not value.strip():
        return ParseFailure(FailureCode.empty_field, f"{name} is empty")
    return None


def _string_list(obj: Mapping, name: str) -> ParseFailure | None:
    value = obj[name]
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        return ParseFailure(FailureCode.schema_mismatch, f"{name} must be a list of strings")
    return None


def _validate_multiple_choice(obj: Mapping) -> ParseFailure | dict:
    if "answer_index" not in obj and "answer_indices" in obj:
        return ParseFailure(FailureCode.multiple_correct_in_mc, "multiple answers supplied to a single-answer format")
    failure = _missing(obj, ("question", "options", "answer_index", "explanation"))
    if failure:
        return failure
    answer = obj["answer_index"]
    if isinstance(answer, list):
        if len(answer) > 1:
            return ParseFailure(FailureCode.multiple_correct_in_mc, "answer_index holds several answers")
        return ParseFailure(FailureCode.schema_mismatch, "answer_index must be a single integer")
    failure = _string_list(obj, "options")
    if failure:
        return failure
    if not _is_int(answer):
        return ParseFailure(FailureCode.schema_mismatch, "answer_index must be an integer")
    if len(obj["options"]) != 4:
        return ParseFailure(FailureCode.schema_mismatch, f"expected 4 options, got {len(obj['options'])}")
    for name in ("question", "explanation"):
        failure = _text_field(obj, name)
        if failure:
            return failure
    if any(not opt.strip() for opt in obj["options"]):
        return ParseFailure(FailureCode.empty_field, "an option is empty")
    if not 0 <= answer <= 3:
        return ParseFailure(FailureCode.index_out_of_range, f"answer_index {answer} outside 0..3")
    return {
        "question": obj["question"],
        "options": list(obj["options"]),
        "answer_index": answer,
        "explanation": obj["explanation"],
    }


def _validate_multiple_select(obj: Mapping) -> ParseFailure | dict:
    failure = _missing(obj, ("question", "options", "answer_indices", "explanation"))
    if failure:
        return failure
    failure = _string_list(obj, "options")
    if failure:
        return failure
    indices = obj["answer_indices"]
    if not isinstance(indices, list) or any(not _is_int(i) for i in indices):
        return ParseFailure(FailureCode.schema_mismatch, "answer_indices must be a list of integers")
    if not 4 <= len(obj["options"]) <= 6:
        return ParseFailure(FailureCode.schema_mismatch, f"expected 4-6 options, got {len(obj['options'])}")
    if not indices:
        return ParseFailure(FailureCode.schema_mismatch, "answer_indices is empty")
    if len(set(indices)) != len(indices):
        return ParseFailure(FailureCode.schema_mismatch, "answer_indices repeats an index")
    for name in ("question", "explanation"):
        failure = _text_field(obj, name)
        if failure:
            return failure
    if any(not opt.strip() for opt in obj["options"]):
        return ParseFailure(FailureCode.empty_field, "an option is empty")
    upper = len(obj["options"]) - 1
    if any(i < 0 or i > upper for i in indices):
        return ParseFailure(FailureCode.index_out_of_range, f"an answer index falls outside 0..{upper}")
    return {
        "question": obj["question"],
        "options": list(obj["options"]),
        "answer_indices": sorted(indices),
        "explanation": obj["explanation"],
    }


def _validate_true_false(obj: Mapping) -> ParseFailure | dict:
    failure = _missing(obj, ("question", "answer", "explanation"))
    if failure:
        return failure
    if not isinstance(obj["answer"], bool):
        return ParseFailure(FailureCode.schema_mismatch, "answer must be strictly boolean")
    for name in ("question", "explanation"):
        failure = _text_field(obj, name)
        if failure:
            return failure
    return {"question": obj["question"], "answer": obj["answer"], "explanation": obj["explanation"]}


def _validate_fill_in_the_blank(obj: Mapping) -> ParseFailure | dict:
    failure = _missing(obj, ("question", "answers", "explanation"))
    if failure:
        return failure
    if not isinstance(obj["question"], str):
        return ParseFailure(FailureCode.schema_mismatch, "question must be a string")
    failure = _string_list(obj, "answers")
    if failure:
        return failure
    # Question emptiness precedes blank counting: an empty question cannot
    # meaningfully be missing blanks.
    failure = _text_field(obj, "question")
    if failure:
        return failure
    blanks = len(BLANK_RE.findall(obj["question"]))
    if blanks == 0:
        return ParseFailure(FailureCode.missing_blank, "question contains no ____ marker")
    if len(obj["answers"]) != blanks:
        return ParseFailure(
            FailureCode.blank_answer_mismatch,
            f"{blanks} blank(s) but {len(obj['answers'])} answer(s)",
        )
    failure = _text_field(obj, "explanation")
    if failure:
        return failure
    if any(not a.strip() for a in obj["answers"]):
        return ParseFailure(FailureCode.empty_field, "an answer is empty")
    return {"question": obj["question"], "answers": list(obj["answers"]), "explanation": obj["explanation"]}


def _validate_free_response_essay(obj: Mapping) -> ParseFailure | dict:
    failure = _missing(obj, ("question", "exemplar_points"))
    if failure:
        return failure
    failure = _string_list(obj, "exemplar_points")
    if failure:
        return failure
    failure = _text_field(obj, "question")
    if failure:
        return failure
    if not obj["exemplar_points"]:
        return ParseFailure(FailureCode.schema_mismatch, "exemplar_points is empty")
    if any(not p.strip() for p in obj["exemplar_points"]):
        return ParseFailure(FailureCode.empty_field, "an exemplar point is empty")
    return {"question": obj["question"], "exemplar_points": list(obj["exemplar_points"])}


_VALIDATORS = {
    QuestionFormat.multiple_choice: _validate_multiple_choice,
    QuestionFormat.multiple_select: _validate_multiple_select,
    QuestionFormat.true_false: _validate_true_false,
    QuestionFormat.fill_in_the_blank: _validate_fill_in_the_blank,
    QuestionFormat.free_response_essay: _validate_free_response_essay,
}


def parse_question(json_value, expected_format: QuestionFormat, source_digest: str = ""):
    """Validate a parsed object against the canonical schema for the format.

    Key order and extra keys are tolerated; required fields and cardinalities
    are strict. Returns a ParsedQuestion or a ParseFailure; never raises.
    """
    if not isinstance(json_value, Mapping):
        return ParseFailure(FailureCode.schema_mismatch, "top-level JSON value is not an object")
    result = _VALIDATORS[expected_format](json_value)
    if isinstance(result, ParseFailure):
        return result
    return ParsedQuestion(format=expected_format, payload=result, source_digest=source_digest)


def classify(raw_text: str, expected_format: QuestionFormat):
    """Full structural pipeline for one raw generation.

    Returns (ValidityRecord, ParsedQuestion or None).
    """
    digest = sha256_hex(raw_text) if isinstance(raw_text, str) else ""
    value = extract_json(raw_text)
    if isinstance(value, ParseFailure):
        return ValidityRecord(json_ok=False, format_ok=None, failure=value.code), None
    parsed = parse_question(value, expected_format, source_digest=digest)
    if isinstance(parsed, ParseFailure):
        return ValidityRecord(json_ok=True, format_ok=False, failure=parsed.code), None
    return ValidityRecord(json_ok=True, format_ok=True, failure=None), parsed


def score_validity(observations: Iterable[ValidityObservation]) -> ValidityAggregate:
    """The three validity metrics over a batch of keyed records.

    json_accuracy counts all records; format_accuracy divides by the number of
    JSON-parseable records only and is None (absent, never 0) when nothing
    parsed; the existence score counts, per group, how many of the five
    formats produced at least one fully valid question, averaged over groups.
    """
    obs = list(observations)
    if not obs:
        raise EmptyBatchError("no validity records to score")
    n = len(obs)
    json_ok = sum(1 for o in obs if o.record.json_ok)
    format_ok = sum(1 for o in obs if o.record.format_ok is True)
    groups: dict[tuple, set[QuestionFormat]] = {}
    for o in obs:
        groups.setdefault(o.group, set())
        if o.record.fully_valid():
            groups[o.group].add(o.format)
    existence = sum(len(valid_formats) for valid_formats in groups.values()) / len(groups)
    return ValidityAggregate(
        json_accuracy=json_ok / n,
        format_accuracy=(format_ok / json_ok) if json_ok else None,
        existence_score=existence,
        n=n,
    )
