"""Prompt construction at four increasing levels of instruction detail.

Level 1 is a terse directive plus the context slice and format name; level 2
expands the task description; level 3 adds an enumerated considerations list;
level 4 adds a characteristics-of-an-ideal-response section. Content only
accumulates as the level rises, so the element manifest and prompt length are
non-decreasing in level. Rendering is pure: the same (slice, format, level)
yields byte-identical text, frozen by golden-snapshot tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .parsing import QUESTION_SCHEMAS, SchemaDescriptor
from .taxonomy import (
    ContextSlice,
    FORMAT_LABELS,
    QuestionFormat,
    QuestionType,
    TYPE_DIRECTIVES,
)


class TelerLevel(str, Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"

    @property
    def rank(self) -> int:
        return int(self.value[1])


@dataclass(frozen=True)
class PromptPackage:
    prompt_text: str
    level: TelerLevel
    qtype: QuestionType
    format: QuestionFormat
    schema_id: str
    slice_digest: str
    element_manifest: frozenset[str]


def schema_for(format: QuestionFormat) -> SchemaDescriptor:
    """Canonical output schema descriptor for a question format."""
    return QUESTION_SCHEMAS[format]


_FORMAT_RULES: dict[QuestionFormat, str] = {
    QuestionFormat.multiple_choice: "provide exactly 4 options with exactly one correct answer",
    QuestionFormat.multiple_select: "provide 4 to 6 options with at least two correct answers",
    QuestionFormat.true_false: "state one claim that is unambiguously true or false",
    QuestionFormat.fill_in_the_blank: "mark every blank with ____ and give one answer per blank",
    QuestionFormat.free_response_essay: "pose an open prompt and list the points a strong answer makes",
}

_IDEAL_NOTES: dict[QuestionFormat, str] = {
    QuestionFormat.multiple_choice: "Distractors are plausible misconceptions, not throwaways.",
    QuestionFormat.multiple_select: "Every correct option is independently defensible; incorrect options are plausible.",
    QuestionFormat.true_false: "The claim tests understanding, not trivia or wording tricks.",
    QuestionFormat.fill_in_the_blank: "Blanks fall on the key terms, and each has a single expected answer.",
    QuestionFormat.free_response_essay: "The exemplar points cover the reasoning steps a teacher would look for.",
}


def render_context(slice: ContextSlice) -> str:
    lines = ["Simulation context:"]
    for ku in slice.kus:
        desc = f" — {ku.description}" if ku.description else ""
        lines.append(f"- Knowledge unit [{ku.id}] {ku.name} ({ku.kind}){desc}")
    for rel in slice.rels:
        arrow = " -> " if rel.directed else " <-> "
        chain = arrow.join(rel.members)
        desc = f" — {rel.description}" if rel.description else ""
        lines.append(f"- Relationship [{rel.id}] {rel.label}: {chain}{desc}")
    if slice.chain_order is not None:
        lines.append("- Chain to trace, in order: " + " -> ".join(slice.chain_order))
    return "\n".join(lines)


def build_prompt(slice: ContextSlice, format: QuestionFormat, level: TelerLevel) -> PromptPackage:
    """Render one generation prompt and pair it with its output schema."""
    schema = schema_for(format)
    label = FORMAT_LABELS[format]
    sections = [
        f"Write exactly one {label} question for students working with this simulation.",
        f"Question intent: {TYPE_DIRECTIVES[slice.qtype]}",
    ]
    if level.rank >= 2:
        sections.append(
            "Task detail: you are writing an assessment item for students who are exploring an"
            " interactive science simulation. Use only the knowledge units and relationships"
            " listed below; do not introduce outside facts or invent simulation features."
            f" The question must stand alone, be answerable from the simulation, and {_FORMAT_RULES[format]}."
        )
    sections.append("Teacher goals:\n" + (slice.goals_excerpt if slice.goals_excerpt else "(none stated)"))
    sections.append(render_context(slice))
    if level.rank >= 3:
        sections.append(
            "Considerations:\n"
            "1. Ground every detail in the listed knowledge units and relationships.\n"
            "2. Address the teacher goals directly; the question should help assess them.\n"
            f"3. Follow the {label} format exactly: {_FORMAT_RULES[format]}.\n"
            "4. Use clear, neutral classroom language with no leading phrasing.\n"
            "5. Make the expected answer unambiguous given the simulation context."
        )
    if level.rank >= 4:
        sections.append(
            "Characteristics of an ideal response:\n"
            "- The question is fluent, specific, and interpretable on first read.\n"
            "- It is answerable from information observable in the simulation.\n"
            "- It encourages reasoning about the simulation rather than recall of the prompt.\n"
            f"- {_IDEAL_NOTES[format]}\n"
            "- The JSON is complete, with no fields left as placeholders."
        )
    sections.append(
        f'Output: return a single JSON object matching schema "{schema.schema_id}" exactly:\n'
        f"{schema.template}\n"
        "Return only the JSON object, with no surrounding text."
    )
    return PromptPackage(
        prompt_text="\n\n".join(sections),
        level=level,
        qtype=slice.qtype,
        format=format,
        schema_id=schema.schema_id,
        slice_digest=slice.digest(),
        element_manifest=slice.element_ids(),
    )
