from __future__ import annotations

import random
from pathlib import Path

from conftest import random_representation
from simqgen.parsing import SCHEMAS_BY_ID
from simqgen.prompts import TelerLevel, build_prompt, schema_for
from simqgen.taxonomy import QuestionFormat, QuestionType, context_for, supported_types

GOLDEN_DIR = Path(__file__).parent / "fixtures" / "golden_prompts"

LEVELS = list(TelerLevel)
FORMATS = list(QuestionFormat)


def test_schema_for_true_false() -> None:
    schema = schema_for(QuestionFormat.true_false)
    assert [f.name for f in schema.fields] == ["question", "answer", "explanation"]
    assert "boolean" in [f.type_name for f in schema.fields]


def test_schema_for_multiple_choice() -> None:
    schema = schema_for(QuestionFormat.multiple_choice)
    assert [f.name for f in schema.fields] == ["question", "options", "answer_index", "explanation"]
    options = next(f for f in schema.fields if f.name == "options")
    assert options.cardinality == "exactly 4"


def test_schema_for_fill_in_the_blank() -> None:
    schema = schema_for(QuestionFormat.fill_in_the_blank)
    assert [f.name for f in schema.fields] == ["question", "answers", "explanation"]
    assert "____" in schema.fields[0].cardinality


def test_every_schema_id_resolves_in_registry() -> None:
    for fmt in FORMATS:
        schema = schema_for(fmt)
        assert SCHEMAS_BY_ID[schema.schema_id] is schema
        # the embedded template is itself valid JSON after placeholder cleanup
        assert schema.template.startswith("{") and schema.template.endswith("}")


def test_manifest_and_length_monotone_on_fixture(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.cause_and_effect, 0)
    for fmt in FORMATS:
        packages = [build_prompt(slice, fmt, level) for level in LEVELS]
        for low, high in zip(packages, packages[1:]):
            assert low.element_manifest <= high.element_manifest
            assert len(low.prompt_text) <= len(high.prompt_text)


def test_manifest_monotone_on_random_slices() -> None:
    rng = random.Random(31)
    checked = 0
    for _ in range(60):
        rep = random_representation(rng)
        for qtype in supported_types(rep):
            slice = context_for(rep, qtype, rng.randint(0, 50))
            fmt = rng.choice(FORMATS)
            packages = [build_prompt(slice, fmt, level) for level in LEVELS]
            for low, high in zip(packages, packages[1:]):
                assert low.element_manifest <= high.element_manifest
                assert len(low.prompt_text) <= len(high.prompt_text)
            checked += 1
    assert checked > 60


def test_manifest_subset_of_slice_elements(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.relationship, 0)
    pkg = build_prompt(slice, QuestionFormat.multiple_select, TelerLevel.L2)
    assert pkg.element_manifest <= slice.element_ids()


def test_l3_contains_enumerated_considerations(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.conceptual, 0)
    pkg = build_prompt(slice, QuestionFormat.multiple_choice, TelerLevel.L3)
    assert "Considerations:" in pkg.prompt_text
    assert "1." in pkg.prompt_text and "5." in pkg.prompt_text
    assert pkg.schema_id == "question.multiple_choice.v1"
    assert "answer_index" in pkg.prompt_text


def test_l4_adds_ideal_response_section(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.conceptual, 0)
    l3 = build_prompt(slice, QuestionFormat.true_false, TelerLevel.L3)
    l4 = build_prompt(slice, QuestionFormat.true_false, TelerLevel.L4)
    assert "Characteristics of an ideal response:" not in l3.prompt_text
    assert "Characteristics of an ideal response:" in l4.prompt_text


def test_true_false_l1_names_format_and_schema(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.conceptual, 0)
    pkg = build_prompt(slice, QuestionFormat.true_false, TelerLevel.L1)
    assert "true/false" in pkg.prompt_text
    assert '"answer": <true or false>' in pkg.prompt_text


def test_every_level_embeds_goals_and_schema(chain_rep) -> None:
    for qtype in supported_types(chain_rep):
        slice = context_for(chain_rep, qtype, 0)
        for fmt in FORMATS:
            for level in LEVELS:
                pkg = build_prompt(slice, fmt, level)
                assert chain_rep.instruction_goals in pkg.prompt_text
                assert pkg.schema_id in pkg.prompt_text


def test_prompt_determinism(gas_law_rep) -> None:
    slice = context_for(gas_law_rep, QuestionType.justification, 0)
    first = build_prompt(slice, QuestionFormat.free_response_essay, TelerLevel.L4)
    second = build_prompt(slice, QuestionFormat.free_response_essay, TelerLevel.L4)
    assert first.prompt_text == second.prompt_text
    assert first.slice_digest == second.slice_digest


def test_golden_snapshots_stable(gas_law_rep, chain_rep) -> None:
    cases = {
        "conceptual_multiple_choice_L3": (gas_law_rep, QuestionType.conceptual, QuestionFormat.multiple_choice, TelerLevel.L3),
        "cause_and_effect_true_false_L1": (gas_law_rep, QuestionType.cause_and_effect, QuestionFormat.true_false, TelerLevel.L1),
        "causal_chain_fill_in_the_blank_L4": (chain_rep, QuestionType.causal_chain, QuestionFormat.fill_in_the_blank, TelerLevel.L4),
        "justification_free_response_essay_L2": (gas_law_rep, QuestionType.justification, QuestionFormat.free_response_essay, TelerLevel.L2),
    }
    for name, (rep, qtype, fmt, level) in cases.items():
        slice = context_for(rep, qtype, 0)
        pkg = build_prompt(slice, fmt, level)
        golden = (GOLDEN_DIR / f"{name}.txt").read_text(encoding="utf-8")
        assert pkg.prompt_text == golden, f"golden drifted: {name}"
