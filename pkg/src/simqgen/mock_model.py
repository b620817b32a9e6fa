"""Deterministic in-process model endpoints for tests, demos, and dry runs.

A config whose endpoint_url uses the mock:// scheme never touches the
network. The host part selects a behavior:

- ``mock://model``  answers any schema-tagged prompt with a valid payload
- ``mock://prose``  returns prose with no JSON object at all
- ``mock://echo``   returns the prompt text unchanged

Responses are pure functions of the prompt text, so whole benchmark runs are
reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import re

from .judging import CRITERION_KEYS, JUDGE_SCHEMA_ID

EXTRACTION_SCHEMA_ID = "sim.extraction.v1"

_SCHEMA_RE = re.compile(r'matching schema "([^"]+)"')


def _tag(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()[:8]


def _question_payload(schema_id: str, tag: str) -> dict:
    if schema_id == "question.multiple_choice.v1":
        return {
            "question": f"Which statement about this simulation is supported by its context? (item {tag})",
            "options": [
                "The listed relationship holds as described.",
                "The knowledge units are unrelated.",
                "The simulation contradicts its own description.",
                "None of the listed concepts appear in the lab.",
            ],
            "answer_index": 0,
            "explanation": "The simulation context states the relationship directly.",
        }
    if schema_id == "question.multiple_select.v1":
        return {
            "question": f"Select every statement consistent with the simulation context. (item {tag})",
            "options": [
                "The described relationship links the listed knowledge units.",
                "Changing the inputs can affect the outputs.",
                "The simulation has no knowledge units.",
                "The context contradicts itself.",
            ],
            "answer_indices": [0, 1],
            "explanation": "The first two statements restate the provided context.",
        }
    if schema_id == "question.true_false.v1":
        return {
            "question": f"The simulation context links the listed knowledge units. (item {tag})",
            "answer": True,
            "explanation": "The relationship in the context states the link.",
        }
    if schema_id == "question.fill_in_the_blank.v1":
        return {
            "question": f"In this simulation, the listed relationship connects the knowledge units ____. (item {tag})",
            "answers": ["directly"],
            "explanation": "The context lists the relationship explicitly.",
        }
    if schema_id == "question.free_response_essay.v1":
        return {
            "question": f"Explain how the listed knowledge units interact in this simulation. (item {tag})",
            "exemplar_points": [
                "Names the knowledge units and their roles.",
                "Uses the stated relationship to connect them.",
            ],
        }
    raise KeyError(schema_id)


def _judge_payload(prompt_text: str) -> dict:
    # Scores vary across prompts (items) but are identical for identical
    # prompts, so a panel of mock judges agrees perfectly.
    digest = hashlib.sha256(prompt_text.encode("utf-8")).digest()
    return {key: 3 + digest[i] % 3 for i, key in enumerate(CRITERION_KEYS)}


def _extraction_payload() -> dict:
    return {
        "knowledge_units": [
            {"name": "temperature", "description": "heat level of the gas", "kind": "input", "source_turn": 0},
            {"name": "pressure", "description": "force exerted by the gas", "kind": "output", "source_turn": 0},
            {"name": "volume", "description": "space the gas occupies", "kind": "observable", "source_turn": 0},
        ],
        "relationships": [
            {
                "label": "heating raises pressure",
                "description": "raising temperature increases pressure",
                "members": ["temperature", "pressure"],
                "directed": True,
                "source_turn": 0,
            },
            {
                "label": "pressure and volume trade off",
                "description": "at fixed temperature, pressure rises as volume falls",
                "members": ["pressure", "volume"],
                "directed": False,
                "source_turn": 0,
            },
        ],
    }


def respond(behavior: str, prompt_text: str) -> str:
    if behavior == "echo":
        return prompt_text
    if behavior == "prose":
        return "Certainly! Here is a thoughtful question for your students to discuss in class."
    if behavior != "model":
        raise KeyError(f"unknown mock behavior {behavior!r}")
    match = _SCHEMA_RE.search(prompt_text)
    if match is None:
        return "I could not find an output schema to follow."
    schema_id = match.group(1)
    if schema_id == JUDGE_SCHEMA_ID:
        payload = _judge_payload(prompt_text)
    elif schema_id == EXTRACTION_SCHEMA_ID:
        payload = _extraction_payload()
    else:
        payload = _question_payload(schema_id, _tag(prompt_text))
    return json.dumps(payload, ensure_ascii=False)
