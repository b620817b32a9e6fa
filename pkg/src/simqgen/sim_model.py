"""Simulation representations: knowledge units, relationships, graph utilities.

A simulation is described, never executed. The representation records the
teacher's instruction goals as free text plus the knowledge units (concepts,
variables, skills) and the relationships that link them. All types here are
immutable values; operations return new objects or plain reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .canonical import digest_of
from .errors import InvalidRepresentationError, NoChainError, ValidationFailedError

KU_KINDS = ("input", "output", "constant", "observable")

# Top-level keys of the on-disk document, in canonical order.
CANONICAL_FIELDS = ("sim_id", "title", "instruction_goals", "knowledge_units", "relationships")


@dataclass(frozen=True)
class KnowledgeUnit:
    """A concept, variable, or skill central to the lab."""

    id: str
    name: str
    description: str = ""
    kind: str = "observable"


@dataclass(frozen=True)
class Relationship:
    """A labeled link among two or more knowledge units.

    ``members`` is ordered; for directed relationships the order encodes the
    traversal direction (consecutive members form edges). Undirected
    relationships are conceptual groupings traversable in any direction.
    """

    id: str
    label: str
    description: str = ""
    members: tuple[str, ...] = ()
    directed: bool = False


@dataclass(frozen=True)
class SimulationRepresentation:
    sim_id: str
    title: str
    instruction_goals: str
    knowledge_units: tuple[KnowledgeUnit, ...]
    relationships: tuple[Relationship, ...]
    # Unknown top-level keys read in lenient mode, preserved on re-serialization.
    extras: dict = field(default_factory=dict, compare=True, repr=False)

    def ku_by_id(self, ku_id: str) -> KnowledgeUnit:
        for ku in self.knowledge_units:
            if ku.id == ku_id:
                return ku
        raise KeyError(ku_id)

    def digest(self) -> str:
        return digest_of(to_json_dict(self))


@dataclass(frozen=True)
class Violation:
    """One invariant violation; violations are data, not exceptions."""

    code: str
    message: str
    element_id: str | None = None


def validate_representation(s: SimulationRepresentation) -> list[Violation]:
    """Report every invariant violation; an empty list means valid.

    Pure: the same representation always yields the same report, in a
    deterministic order (KU checks, then relationship checks).
    """
    report: list[Violation] = []
    if not s.knowledge_units:
        report.append(Violation("EMPTY_KU_SET", "representation has no knowledge units"))

    seen_ku: set[str] = set()
    for ku in s.knowledge_units:
        if ku.id in seen_ku:
            report.append(Violation("DUPLICATE_KU_ID", f"knowledge unit id {ku.id!r} repeats", ku.id))
        seen_ku.add(ku.id)
        if not ku.name.strip():
            report.append(Violation("EMPTY_KU_NAME", f"knowledge unit {ku.id!r} has an empty name", ku.id))
        if ku.kind not in KU_KINDS:
            report.append(
                Violation(
                    "INVALID_KU_KIND",
                    f"knowledge unit {ku.id!r} kind {ku.kind!r} is not one of {', '.join(KU_KINDS)}",
                    ku.id,
                )
            )

    seen_rel: set[str] = set()
    for rel in s.relationships:
        if rel.id in seen_rel:
            report.append(Violation("DUPLICATE_RELATIONSHIP_ID", f"relationship id {rel.id!r} repeats", rel.id))
        seen_rel.add(rel.id)
        if len(rel.members) < 2:
            report.append(
                Violation("TOO_FEW_MEMBERS", f"relationship {rel.id!r} links fewer than two knowledge units", rel.id)
            )
        if len(set(rel.members)) != len(rel.members):
            report.append(Violation("DUPLICATE_MEMBER", f"relationship {rel.id!r} repeats a member id", rel.id))
        for member in rel.members:
            if member not in seen_ku:
                report.append(
                    Violation("DANGLING_MEMBER", f"relationship {rel.id!r} references unknown id {member!r}", rel.id)
                )

    return report


def _require_valid(s: SimulationRepresentation) -> None:
    report = validate_representation(s)
    if report:
        raise InvalidRepresentationError(report)


def ku_graph(s: SimulationRepresentation) -> dict[str, set[str]]:
    """Successor map over knowledge-unit ids.

    Undirected relationships make every member pair mutually adjacent;
    directed relationships contribute only consecutive member pairs, in
    member order.
    """
    _require_valid(s)
    adjacency: dict[str, set[str]] = {ku.id: set() for ku in s.knowledge_units}
    for rel in s.relationships:
        if rel.directed:
            for a, b in zip(rel.members, rel.members[1:]):
                adjacency[a].add(b)
        else:
            for a in rel.members:
                for b in rel.members:
                    if a != b:
                        adjacency[a].add(b)
    return adjacency


def enumerate_chains(s: SimulationRepresentation, n_nodes: int) -> list[tuple[str, ...]]:
    """All simple paths of exactly ``n_nodes`` nodes, lexicographically ordered.

    Any longer simple path contains an ``n_nodes`` prefix, so enumerating
    exact-length paths decides existence for "length >= n_nodes" as well.
    """
    adjacency = ku_graph(s)
    found: list[tuple[str, ...]] = []

    def extend(path: list[str]) -> None:
        if len(path) == n_nodes:
            found.append(tuple(path))
            return
        for nxt in sorted(adjacency[path[-1]]):
            if nxt not in path:
                path.append(nxt)
                extend(path)
                path.pop()

    for start in sorted(adjacency):
        extend([start])
    return found


def find_chain(s: SimulationRepresentation, min_nodes: int, seed: int) -> list[str]:
    """Pick one simple path of at least ``min_nodes`` knowledge units.

    Candidates are every simple path of exactly ``min_nodes`` nodes, ordered
    lexicographically by id sequence; the seed indexes into them modulo the
    candidate count, so selection is deterministic.
    """
    if min_nodes < 3:
        raise ValueError("min_nodes must be >= 3")
    candidates = enumerate_chains(s, min_nodes)
    if not candidates:
        raise NoChainError(f"no simple path of {min_nodes} knowledge units exists")
    return list(candidates[seed % len(candidates)])


def to_json_dict(s: SimulationRepresentation) -> dict:
    """Canonical document shape: fixed top-level key order, then extras."""
    doc = {
        "sim_id": s.sim_id,
        "title": s.title,
        "instruction_goals": s.instruction_goals,
        "knowledge_units": [
            {"id": ku.id, "name": ku.name, "description": ku.description, "kind": ku.kind}
            for ku in s.knowledge_units
        ],
        "relationships": [
            {
                "id": rel.id,
                "label": rel.label,
                "description": rel.description,
                "members": list(rel.members),
                "directed": rel.directed,
            }
            for rel in s.relationships
        ],
    }
    for key in sorted(s.extras):
        doc[key] = s.extras[key]
    return doc


def serialize(s: SimulationRepresentation) -> str:
    return json.dumps(to_json_dict(s), indent=2, ensure_ascii=False) + "\n"


def from_json_dict(doc: dict, strict: bool = True) -> SimulationRepresentation:
    """Build a representation from a parsed document.

    Strict mode rejects unknown top-level keys; lenient mode preserves them in
    ``extras`` so they survive a round-trip. Structural problems (wrong types)
    raise ValidationFailedError; invariant violations are left for
    validate_representation to report.
    """
    if not isinstance(doc, dict):
        raise ValidationFailedError(message="representation document must be a JSON object")
    unknown = [k for k in doc if k not in CANONICAL_FIELDS]
    if strict and unknown:
        raise ValidationFailedError(message=f"unknown keys: {', '.join(sorted(unknown))}")
    sim_id = doc.get("sim_id")
    if not isinstance(sim_id, str) or not sim_id:
        raise ValidationFailedError(message="sim_id must be a non-empty string")

    def _text(value, default: str = "") -> str:
        return value if isinstance(value, str) else default

    kus = []
    for raw in doc.get("knowledge_units", []) or []:
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise ValidationFailedError(message="each knowledge unit needs a string id")
        kus.append(
            KnowledgeUnit(
                id=raw["id"],
                name=_text(raw.get("name")),
                description=_text(raw.get("description")),
                kind=_text(raw.get("kind"), "observable"),
            )
        )
    rels = []
    for raw in doc.get("relationships", []) or []:
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise ValidationFailedError(message="each relationship needs a string id")
        members = raw.get("members", [])
        if not isinstance(members, list) or any(not isinstance(m, str) for m in members):
            raise ValidationFailedError(message=f"relationship {raw['id']!r} members must be a list of ids")
        rels.append(
            Relationship(
                id=raw["id"],
                label=_text(raw.get("label")),
                description=_text(raw.get("description")),
                members=tuple(members),
                directed=bool(raw.get("directed", False)),
            )
        )
    return SimulationRepresentation(
        sim_id=sim_id,
        title=_text(doc.get("title")),
        instruction_goals=_text(doc.get("instruction_goals")),
        knowledge_units=tuple(kus),
        relationships=tuple(rels),
        extras={k: doc[k] for k in unknown} if not strict else {},
    )


def deserialize(text: str, strict: bool = True) -> SimulationRepresentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailedError(message=f"not a JSON document: {exc}") from exc
    return from_json_dict(doc, strict=strict)


def with_next_ids(s: SimulationRepresentation) -> tuple[int, int]:
    """Next free numeric suffixes for system-assigned ku-N / rel-N ids."""

    def next_index(prefix: str, ids: list[str]) -> int:
        best = 0
        for token in ids:
            if token.startswith(prefix) and token[len(prefix):].isdigit():
                best = max(best, int(token[len(prefix):]))
        return best + 1

    return (
        next_index("ku-", [ku.id for ku in s.knowledge_units]),
        next_index("rel-", [rel.id for rel in s.relationships]),
    )
