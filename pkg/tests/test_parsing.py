from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from simqgen.errors import EmptyBatchError
from simqgen.parsing import (
    FailureCode,
    ParseFailure,
    ParsedQuestion,
    ValidityObservation,
    ValidityRecord,
    classify,
    extract_json,
    parse_question,
    score_validity,
)
from simqgen.taxonomy import QuestionFormat

CORPUS = Path(__file__).parent / "fixtures" / "defect_corpus.jsonl"

FORMATS = list(QuestionFormat)


def test_extract_json_fenced_block() -> None:
    raw = '```json\n{"question": "Q?", "answer": true, "explanation": "E"}\n```'
    value = extract_json(raw)
    assert value == {"question": "Q?", "answer": True, "explanation": "E"}


def test_extract_json_prose_wrapped_balanced_span() -> None:
    raw = 'Sure! Here is your question: {"question": "Q?", "answer": true, "explanation": "E"} Enjoy!'
    value = extract_json(raw)
    assert value == {"question": "Q?", "answer": True, "explanation": "E"}


def test_extract_json_no_brace() -> None:
    failure = extract_json("no object here at all")
    assert isinstance(failure, ParseFailure)
    assert failure.code is FailureCode.no_json


def test_extract_json_unbalanced() -> None:
    failure = extract_json('{"question": "Q?"')
    assert isinstance(failure, ParseFailure)
    assert failure.code is FailureCode.malformed_json


def test_extract_json_braces_inside_strings() -> None:
    raw = '{"question": "Is {x} over } fine?", "answer": false, "explanation": "escaped \\" brace {"}'
    value = extract_json(raw)
    assert isinstance(value, dict)
    assert value["question"] == "Is {x} over } fine?"


def test_extract_json_trailing_prose_ignored() -> None:
    raw = '{"a": 1} {"b": 2}'
    assert extract_json(raw) == {"a": 1}


def test_mc_answer_indices_is_multiple_correct() -> None:
    obj = {"question": "Q?", "options": ["a", "b", "c", "d"], "answer_indices": [0, 1], "explanation": "E"}
    failure = parse_question(obj, QuestionFormat.multiple_choice)
    assert isinstance(failure, ParseFailure)
    assert failure.code is FailureCode.multiple_correct_in_mc


def test_fib_missing_blank() -> None:
    obj = {"question": "No blank here.", "answers": ["x"], "explanation": "E"}
    failure = parse_question(obj, QuestionFormat.fill_in_the_blank)
    assert isinstance(failure, ParseFailure)
    assert failure.code is FailureCode.missing_blank


def test_well_formed_true_false_parses() -> None:
    obj = {"question": "Q?", "answer": False, "explanation": "E"}
    parsed = parse_question(obj, QuestionFormat.true_false)
    assert isinstance(parsed, ParsedQuestion)
    assert parsed.payload == obj


def test_extra_keys_tolerated_missing_keys_fatal() -> None:
    obj = {"question": "Q?", "answer": True, "explanation": "E", "difficulty": "easy"}
    assert isinstance(parse_question(obj, QuestionFormat.true_false), ParsedQuestion)
    del obj["answer"]
    failure = parse_question(obj, QuestionFormat.true_false)
    assert failure.code is FailureCode.schema_mismatch


def test_payload_keeps_only_schema_fields() -> None:
    obj = {"question": "Q?", "answer": True, "explanation": "E", "extra": 1}
    parsed = parse_question(obj, QuestionFormat.true_false)
    assert set(parsed.payload) == {"question", "answer", "explanation"}


def test_multiple_underscore_runs_count_as_one_blank_each() -> None:
    obj = {"question": "The gas will ________ here.", "answers": ["expand"], "explanation": "E"}
    assert isinstance(parse_question(obj, QuestionFormat.fill_in_the_blank), ParsedQuestion)


def test_defect_corpus_classifies_50_of_50() -> None:
    lines = CORPUS.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    for line in lines:
        item = json.loads(line)
        record, question = classify(item["raw"], QuestionFormat(item["expected_format"]))
        got = record.failure.value if record.failure else None
        assert got == item["expected_failure"], item["raw"][:80]
        if item["expected_failure"] is None:
            assert record.fully_valid()
            assert question is not None
        elif item["expected_failure"] in ("no_json", "malformed_json"):
            assert not record.json_ok
            assert record.format_ok is None
        else:
            assert record.json_ok and record.format_ok is False


def _obs(group, fmt, json_ok, format_ok) -> ValidityObservation:
    return ValidityObservation(
        group=group,
        format=fmt,
        record=ValidityRecord(json_ok=json_ok, format_ok=format_ok if json_ok else None),
    )


def test_score_validity_perfect_batch() -> None:
    observations = [_obs(("c1",), fmt, True, True) for fmt in FORMATS]
    agg = score_validity(observations)
    assert agg.json_accuracy == 1.0
    assert agg.format_accuracy == 1.0
    assert agg.existence_score == 5
    assert agg.n == 5


def test_score_validity_all_but_essay_scores_four() -> None:
    observations = [
        _obs(("c1",), fmt, True, fmt is not QuestionFormat.free_response_essay) for fmt in FORMATS
    ]
    assert score_validity(observations).existence_score == 4


def test_score_validity_conditional_denominator() -> None:
    # 5 records: 4 parse as JSON, and 3 of those match the schema.
    records = [
        _obs(("c1",), QuestionFormat.multiple_choice, True, True),
        _obs(("c1",), QuestionFormat.multiple_select, True, True),
        _obs(("c1",), QuestionFormat.true_false, True, True),
        _obs(("c1",), QuestionFormat.fill_in_the_blank, True, False),
        _obs(("c1",), QuestionFormat.free_response_essay, False, None),
    ]
    agg = score_validity(records)
    assert agg.json_accuracy == pytest.approx(0.8)
    assert agg.format_accuracy == pytest.approx(0.75)


def test_format_accuracy_absent_when_nothing_parses() -> None:
    observations = [_obs(("c1",), QuestionFormat.true_false, False, None)]
    agg = score_validity(observations)
    assert agg.format_accuracy is None
    assert agg.json_accuracy == 0.0


def test_existence_averages_over_groups() -> None:
    observations = [_obs(("c1",), fmt, True, True) for fmt in FORMATS]
    observations += [_obs(("c2",), fmt, True, fmt is QuestionFormat.true_false) for fmt in FORMATS]
    assert score_validity(observations).existence_score == pytest.approx(3.0)


def test_score_validity_empty_batch_raises() -> None:
    with pytest.raises(EmptyBatchError):
        score_validity([])


def test_parser_total_on_fuzzed_inputs_smoke() -> None:
    rng = random.Random(99)
    for _ in range(2000):
        length = rng.randint(0, 120)
        raw_bytes = bytes(rng.getrandbits(8) for _ in range(length))
        text = raw_bytes.decode("latin-1")
        record, question = classify(text, rng.choice(FORMATS))
        assert isinstance(record, ValidityRecord)
        value = extract_json(text)
        result = parse_question(value, rng.choice(FORMATS))
        assert isinstance(result, (ParsedQuestion, ParseFailure))
