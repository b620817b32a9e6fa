"""Question taxonomy: the seven pedagogical types, five answer formats, and
the targeted context subset each type receives.

Feeding a model the whole representation produces unfocused questions, so
each type sees only the slice it needs: a conceptual question gets a single
knowledge unit, a cause-and-effect question gets one linked pair, a causal
chain gets an ordered path, and so on. Slice selection is seeded and
deterministic so benchmark runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .canonical import digest_of
from .errors import TypeUnsupportedError
from .sim_model import (
    KnowledgeUnit,
    Relationship,
    SimulationRepresentation,
    enumerate_chains,
    _require_valid,
)


class QuestionType(str, Enum):
    conceptual = "conceptual"
    cause_and_effect = "cause_and_effect"
    critical_thinking = "critical_thinking"
    relationship = "relationship"
    causal_chain = "causal_chain"
    calculation = "calculation"
    justification = "justification"


class QuestionFormat(str, Enum):
    multiple_choice = "multiple_choice"
    multiple_select = "multiple_select"
    true_false = "true_false"
    fill_in_the_blank = "fill_in_the_blank"
    free_response_essay = "free_response_essay"


# One-line intent of each type, used verbatim in generation prompts.
TYPE_DIRECTIVES: dict[QuestionType, str] = {
    QuestionType.conceptual: "Define or describe a single knowledge unit.",
    QuestionType.cause_and_effect: "Explain how one knowledge unit influences another.",
    QuestionType.critical_thinking: "Apply concepts to a novel or complex scenario.",
    QuestionType.relationship: "Identify or reason about a specific relationship.",
    QuestionType.causal_chain: "Trace a sequence of linked changes or effects across multiple knowledge units.",
    QuestionType.calculation: "Solve quantitative problems using known relationships.",
    QuestionType.justification: "Argue for or against a particular interpretation of a relationship based on the simulation.",
}

FORMAT_LABELS: dict[QuestionFormat, str] = {
    QuestionFormat.multiple_choice: "multiple choice",
    QuestionFormat.multiple_select: "multiple select",
    QuestionFormat.true_false: "true/false",
    QuestionFormat.fill_in_the_blank: "fill in the blank",
    QuestionFormat.free_response_essay: "free response essay",
}

CHAIN_MIN_NODES = 3


@dataclass(frozen=True)
class ContextSlice:
    """The subset of a representation a single prompt is conditioned on."""

    sim_ref: str
    qtype: QuestionType
    goals_excerpt: str
    kus: tuple[KnowledgeUnit, ...]
    rels: tuple[Relationship, ...]
    chain_order: tuple[str, ...] | None = None

    def element_ids(self) -> frozenset[str]:
        return frozenset([ku.id for ku in self.kus] + [rel.id for rel in self.rels])

    def to_json_dict(self) -> dict:
        return {
            "sim_ref": self.sim_ref,
            "qtype": self.qtype.value,
            "goals_excerpt": self.goals_excerpt,
            "kus": [
                {"id": ku.id, "name": ku.name, "description": ku.description, "kind": ku.kind}
                for ku in self.kus
            ],
            "rels": [
                {
                    "id": rel.id,
                    "label": rel.label,
                    "description": rel.description,
                    "members": list(rel.members),
                    "directed": rel.directed,
                }
                for rel in self.rels
            ],
            "chain_order": list(self.chain_order) if self.chain_order is not None else None,
        }

    def digest(self) -> str:
        return digest_of(self.to_json_dict())


def slice_from_json_dict(doc: dict) -> ContextSlice:
    return ContextSlice(
        sim_ref=doc["sim_ref"],
        qtype=QuestionType(doc["qtype"]),
        goals_excerpt=doc.get("goals_excerpt", ""),
        kus=tuple(
            KnowledgeUnit(k["id"], k["name"], k.get("description", ""), k.get("kind", "observable"))
            for k in doc.get("kus", [])
        ),
        rels=tuple(
            Relationship(
                r["id"],
                r.get("label", ""),
                r.get("description", ""),
                tuple(r.get("members", [])),
                bool(r.get("directed", False)),
            )
            for r in doc.get("rels", [])
        ),
        chain_order=tuple(doc["chain_order"]) if doc.get("chain_order") is not None else None,
    )


def supported_types(s: SimulationRepresentation) -> set[QuestionType]:
    """Which question types this representation can ground.

    Conceptual needs a knowledge unit; the relationship-shaped types need a
    relationship; causal_chain needs a 3-node simple path; critical thinking
    additionally needs stated instruction goals.
    """
    _require_valid(s)
    result: set[QuestionType] = set()
    if s.knowledge_units:
        result.add(QuestionType.conceptual)
        if s.instruction_goals.strip():
            result.add(QuestionType.critical_thinking)
    if s.relationships:
        result.update(
            {
                QuestionType.cause_and_effect,
                QuestionType.relationship,
                QuestionType.calculation,
                QuestionType.justification,
            }
        )
    if enumerate_chains(s, CHAIN_MIN_NODES):
        result.add(QuestionType.causal_chain)
    return result


def _pick(candidates: list, seed: int):
    # Candidates must arrive sorted by id; seed indexes modulo the count.
    return candidates[seed % len(candidates)]


def _covering_rels(s: SimulationRepresentation, chain: tuple[str, ...]) -> tuple[Relationship, ...]:
    """Relationships that induce adjacency for at least one consecutive pair."""
    pairs = set(zip(chain, chain[1:]))
    covering = []
    for rel in sorted(s.relationships, key=lambda r: r.id):
        induced: set[tuple[str, str]] = set()
        if rel.directed:
            induced.update(zip(rel.members, rel.members[1:]))
        else:
            for a in rel.members:
                for b in rel.members:
                    if a != b:
                        induced.add((a, b))
        if pairs & induced:
            covering.append(rel)
    return tuple(covering)


def _single_rel_coverable(s: SimulationRepresentation, chain: tuple[str, ...]) -> bool:
    pairs = set(zip(chain, chain[1:]))
    for rel in s.relationships:
        if rel.directed:
            induced = set(zip(rel.members, rel.members[1:]))
        else:
            induced = {(a, b) for a in rel.members for b in rel.members if a != b}
        if pairs <= induced:
            return True
    return False


def context_for(s: SimulationRepresentation, qtype: QuestionType, seed: int) -> ContextSlice:
    """Select the type-specific context subset, deterministically per seed.

    Element selection sorts candidates by id and indexes seed modulo count.
    For causal chains, paths spanning more than one relationship are preferred
    over paths contained in a single relationship; within the preferred pool,
    paths are ordered lexicographically by id sequence.
    """
    if qtype not in supported_types(s):
        raise TypeUnsupportedError(f"{qtype.value} is not supported by {s.sim_id}")
    goals = s.instruction_goals
    kus_sorted = sorted(s.knowledge_units, key=lambda k: k.id)
    rels_sorted = sorted(s.relationships, key=lambda r: r.id)

    if qtype is QuestionType.conceptual:
        ku = _pick(kus_sorted, seed)
        return ContextSlice(s.sim_id, qtype, goals, (ku,), ())

    if qtype in (QuestionType.cause_and_effect, QuestionType.calculation, QuestionType.justification):
        rel = _pick(rels_sorted, seed)
        if qtype is QuestionType.cause_and_effect:
            # First two members in member order: for directed relationships
            # that is the cause -> effect reading.
            chosen = rel.members[:2]
        else:
            chosen = rel.members
        return ContextSlice(s.sim_id, qtype, goals, tuple(s.ku_by_id(m) for m in chosen), (rel,))

    if qtype is QuestionType.relationship:
        rel = _pick(rels_sorted, seed)
        return ContextSlice(s.sim_id, qtype, goals, tuple(s.ku_by_id(m) for m in rel.members), (rel,))

    if qtype is QuestionType.causal_chain:
        chains = enumerate_chains(s, CHAIN_MIN_NODES)
        cross = [c for c in chains if not _single_rel_coverable(s, c)]
        pool = cross or chains
        chain = _pick(pool, seed)
        return ContextSlice(
            s.sim_id,
            qtype,
            goals,
            tuple(s.ku_by_id(k) for k in chain),
            _covering_rels(s, chain),
            chain_order=chain,
        )

    # critical_thinking: pair + relationship when one exists, else a lone unit;
    # the goals excerpt seeds the novel-scenario framing.
    if rels_sorted:
        rel = _pick(rels_sorted, seed)
        chosen = rel.members[:2]
        return ContextSlice(s.sim_id, qtype, goals, tuple(s.ku_by_id(m) for m in chosen), (rel,))
    ku = _pick(kus_sorted, seed)
    return ContextSlice(s.sim_id, qtype, goals, (ku,), ())
