"""Shared fixtures and independent oracles.

The oracles here deliberately take different computational routes from the
implementation: simple paths are enumerated by filtering permutations, and
Krippendorff's alpha is computed by direct pair enumeration instead of a
coincidence matrix.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest

from simqgen.sim_model import KnowledgeUnit, Relationship, SimulationRepresentation
from simqgen.taxonomy import ContextSlice, QuestionType


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # Expose per-phase results so the acceptance module can print its
    # one-line pass/fail banner per criterion.
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)


@pytest.fixture
def gas_law_rep() -> SimulationRepresentation:
    return SimulationRepresentation(
        sim_id="sim-gas",
        title="Gas Law Lab",
        instruction_goals="Explore how heating a sealed gas changes its pressure.",
        knowledge_units=(
            KnowledgeUnit("ku-1", "temperature", "heat level of the gas", "input"),
            KnowledgeUnit("ku-2", "pressure", "force on the container walls", "output"),
        ),
        relationships=(
            Relationship("rel-1", "heating raises pressure", "temperature drives pressure", ("ku-1", "ku-2"), True),
        ),
    )


@pytest.fixture
def chain_rep() -> SimulationRepresentation:
    """A-B-C linked by two relationships: supports every question type."""
    return SimulationRepresentation(
        sim_id="sim-chain",
        title="Chain Lab",
        instruction_goals="Trace how a change propagates through the system.",
        knowledge_units=(
            KnowledgeUnit("ku-a", "A", "first", "input"),
            KnowledgeUnit("ku-b", "B", "middle", "observable"),
            KnowledgeUnit("ku-c", "C", "last", "output"),
        ),
        relationships=(
            Relationship("rel-1", "A to B", "", ("ku-a", "ku-b"), True),
            Relationship("rel-2", "B to C", "", ("ku-b", "ku-c"), True),
        ),
    )


@pytest.fixture
def five_ku_rep() -> SimulationRepresentation:
    """Five units where exactly two 3-node simple paths exist (A-B-C both ways)."""
    return SimulationRepresentation(
        sim_id="sim-five",
        title="Five Unit Lab",
        instruction_goals="Compare linked and isolated quantities.",
        knowledge_units=tuple(
            KnowledgeUnit(f"ku-{x}", x.upper(), "", "observable") for x in ("a", "b", "c", "d", "e")
        ),
        relationships=(
            Relationship("rel-1", "A with B", "", ("ku-a", "ku-b"), False),
            Relationship("rel-2", "B with C", "", ("ku-b", "ku-c"), False),
            Relationship("rel-3", "D with E", "", ("ku-d", "ku-e"), False),
        ),
    )


_WORDS = ("mass", "speed", "angle", "charge", "flow", "heat", "force", "rate", "level", "count")


def random_representation(rng: random.Random, max_kus: int = 8, max_rels: int = 6) -> SimulationRepresentation:
    n_kus = rng.randint(1, max_kus)
    kus = tuple(
        KnowledgeUnit(
            id=f"ku-{i}",
            name=f"{rng.choice(_WORDS)} {i}",
            description=rng.choice(("", "a measured quantity", "set by the student")),
            kind=rng.choice(("input", "output", "constant", "observable")),
        )
        for i in range(1, n_kus + 1)
    )
    rels = []
    if n_kus >= 2:
        for i in range(1, rng.randint(0, max_rels) + 1):
            size = rng.randint(2, min(4, n_kus))
            members = tuple(rng.sample([ku.id for ku in kus], size))
            rels.append(
                Relationship(
                    id=f"rel-{i}",
                    label=f"link {i}",
                    description="",
                    members=members,
                    directed=rng.random() < 0.5,
                )
            )
    return SimulationRepresentation(
        sim_id=f"sim-r{rng.randint(0, 10**6)}",
        title="Random Lab",
        instruction_goals=rng.choice(("", "Investigate the linked quantities.")),
        knowledge_units=kus,
        relationships=tuple(rels),
    )


def oracle_adjacency(rep: SimulationRepresentation) -> dict[str, set[str]]:
    """Adjacency built directly from the relationship rules, independent of ku_graph."""
    adj: dict[str, set[str]] = {ku.id: set() for ku in rep.knowledge_units}
    for rel in rep.relationships:
        if rel.directed:
            for a, b in zip(rel.members, rel.members[1:]):
                adj[a].add(b)
        else:
            for a, b in itertools.permutations(rel.members, 2):
                adj[a].add(b)
    return adj


def oracle_simple_paths(rep: SimulationRepresentation, n_nodes: int) -> set[tuple[str, ...]]:
    """Every simple path of n_nodes nodes, by brute-force permutation filtering."""
    adj = oracle_adjacency(rep)
    ids = [ku.id for ku in rep.knowledge_units]
    return {
        perm
        for perm in itertools.permutations(ids, n_nodes)
        if all(b in adj[a] for a, b in zip(perm, perm[1:]))
    }


def slice_invariant_ok(slice: ContextSlice, rep: SimulationRepresentation) -> bool:
    """The per-type ContextSlice invariant plus the no-fabrication rule."""
    ku_ids = {ku.id for ku in rep.knowledge_units}
    rel_ids = {rel.id for rel in rep.relationships}
    if any(ku.id not in ku_ids for ku in slice.kus):
        return False
    if any(rel.id not in rel_ids for rel in slice.rels):
        return False
    if slice.goals_excerpt != rep.instruction_goals:
        return False
    qtype = slice.qtype
    if qtype is QuestionType.conceptual:
        return len(slice.kus) == 1 and len(slice.rels) == 0 and slice.chain_order is None
    if qtype is QuestionType.cause_and_effect:
        return (
            len(slice.kus) == 2
            and len(slice.rels) == 1
            and all(ku.id in slice.rels[0].members for ku in slice.kus)
        )
    if qtype is QuestionType.relationship:
        return len(slice.rels) == 1 and [ku.id for ku in slice.kus] == list(slice.rels[0].members)
    if qtype in (QuestionType.calculation, QuestionType.justification):
        return len(slice.rels) == 1 and [ku.id for ku in slice.kus] == list(slice.rels[0].members)
    if qtype is QuestionType.causal_chain:
        if slice.chain_order is None or len(slice.chain_order) < 3:
            return False
        if len(set(slice.chain_order)) != len(slice.chain_order):
            return False
        for a, b in zip(slice.chain_order, slice.chain_order[1:]):
            if not _adjacent_via(slice, a, b):
                return False
        return True
    if qtype is QuestionType.critical_thinking:
        return 1 <= len(slice.kus) <= 2 and len(slice.rels) <= 1 and bool(slice.goals_excerpt.strip())
    return False


def _adjacent_via(slice: ContextSlice, a: str, b: str) -> bool:
    for rel in slice.rels:
        if rel.directed:
            if any(x == a and y == b for x, y in zip(rel.members, rel.members[1:])):
                return True
        elif a in rel.members and b in rel.members:
            return True
    return False


def alpha_oracle(matrix) -> float:
    """Ordinal Krippendorff's alpha by direct enumeration of pairable values."""
    n_items = max(len(row) for row in matrix)
    units = []
    for col in range(n_items):
        vals = [float(row[col]) for row in matrix if col < len(row) and row[col] is not None]
        if len(vals) >= 2:
            units.append(vals)
    pooled = [v for unit in units for v in unit]
    freq = Counter(pooled)
    ordered = sorted(freq)

    def delta2(a: float, b: float) -> float:
        if a == b:
            return 0.0
        lo, hi = min(a, b), max(a, b)
        between = sum(freq[v] for v in ordered if lo <= v <= hi)
        d = between - (freq[a] + freq[b]) / 2.0
        return d * d

    n = len(pooled)
    observed = 0.0
    for unit in units:
        m = len(unit)
        observed += sum(delta2(unit[i], unit[j]) for i in range(m) for j in range(m) if i != j) / (m - 1)
    observed /= n
    expected = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                expected += delta2(pooled[i], pooled[j])
    expected /= n * (n - 1)
    return 1.0 - observed / expected
