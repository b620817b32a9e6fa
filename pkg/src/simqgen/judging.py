"""Quality judging: the ten-criterion Likert rubric, rating aggregation, and
Krippendorff's alpha for inter-rater consistency.

Alpha uses the coincidence-matrix formulation with ordinal difference
weighting (the scores are Likert, so distances between scale points depend on
how often each point is used). The unit of analysis is a (question, criterion)
pair; raters are judge models; missing ratings are excluded pairwise.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateDataError, EmptyInputError
from .parsing import FailureCode, ParseFailure, ParsedQuestion, extract_json
from .prompts import render_context
from .taxonomy import ContextSlice

# (key, rubric phrasing) in reporting order.
CRITERIA: tuple[tuple[str, str], ...] = (
    ("fluency", "Is the question grammatically fluent and natural-sounding?"),
    ("correctness", "Is all presented information accurate and factually correct?"),
    ("clarity", "Is the question easy to interpret and understand?"),
    ("specificity", "Is the question sufficiently precise to elicit a focused response?"),
    ("bias", "Is the question free from leading language or bias?"),
    ("relevance", "Is the question directly related to the simulation and learning objectives?"),
    ("practicality", "Would this question be useful in a real instructional context?"),
    ("alignment", "Does the question align with the established goals or expectations of the lab?"),
    ("feasibility", "Can the question be answered based on information available in the simulation?"),
    ("critical_thinking", "Does the question encourage deeper reasoning or reflection?"),
)

CRITERION_KEYS: tuple[str, ...] = tuple(key for key, _ in CRITERIA)

JUDGE_SCHEMA_ID = "judge.scores.v1"
JUDGE_SCHEMA_TEMPLATE = (
    '{"fluency": <1-5>, "correctness": <1-5>, "clarity": <1-5>, "specificity": <1-5>, "bias": <1-5>,'
    ' "relevance": <1-5>, "practicality": <1-5>, "alignment": <1-5>, "feasibility": <1-5>,'
    ' "critical_thinking": <1-5>}'
)


@dataclass(frozen=True)
class QualityRating:
    judge_id: str
    question_ref: str
    scores: Mapping[str, int]


@dataclass(frozen=True)
class QualityAggregate:
    per_criterion_mean: Mapping[str, float]
    composite: float
    alpha: float | None
    n_questions: int
    n_judges: int
    # Questions rated by fewer judges than the full observed panel.
    incomplete_questions: tuple[str, ...] = ()


def rubric_prompt(question: ParsedQuestion, slice: ContextSlice) -> tuple[str, str]:
    """Deterministic judge prompt plus the expected score schema id.

    The slice is included so relevance, alignment, and feasibility can be
    judged against the simulation rather than in a vacuum.
    """
    criterion_lines = "\n".join(
        f"{i}. {key} — {phrasing}" for i, (key, phrasing) in enumerate(CRITERIA, start=1)
    )
    payload_json = json.dumps(dict(question.payload), sort_keys=True, ensure_ascii=False)
    text = "\n\n".join(
        [
            "You are rating one generated assessment question against a fixed rubric.",
            render_context(slice)
            + "\n\nTeacher goals:\n"
            + (slice.goals_excerpt if slice.goals_excerpt else "(none stated)"),
            f"Question ({question.format.value} format):\n{payload_json}",
            'Rate each criterion on a 5-point scale (1 = "absolutely not", 5 = "yes, definitely"):\n'
            + criterion_lines,
            f'Output: return a single JSON object matching schema "{JUDGE_SCHEMA_ID}" exactly:\n'
            f"{JUDGE_SCHEMA_TEMPLATE}\n"
            "Return only the JSON object, with no surrounding text.",
        ]
    )
    return text, JUDGE_SCHEMA_ID


def parse_rating(raw_text: str, judge_id: str, question_ref: str):
    """Extract and validate a ten-score object; returns QualityRating or ParseFailure."""
    value = extract_json(raw_text)
    if isinstance(value, ParseFailure):
        return value
    if not isinstance(value, Mapping):
        return ParseFailure(FailureCode.schema_mismatch, "rating is not an object")
    scores: dict[str, int] = {}
    for key in CRITERION_KEYS:
        if key not in value:
            return ParseFailure(FailureCode.missing_criterion, f"criterion {key!r} missing")
        raw = value[key]
        if not isinstance(raw, int) or isinstance(raw, bool):
            return ParseFailure(FailureCode.schema_mismatch, f"criterion {key!r} is not an integer")
        if not 1 <= raw <= 5:
            return ParseFailure(FailureCode.score_out_of_range, f"criterion {key!r} = {raw} outside 1..5")
        scores[key] = raw
    return QualityRating(judge_id=judge_id, question_ref=question_ref, scores=scores)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def question_composites(ratings: Iterable[QualityRating]) -> dict[str, float]:
    """Per-question composite: mean over judges of each judge's criterion mean."""
    by_question: dict[str, list[QualityRating]] = {}
    for rating in ratings:
        by_question.setdefault(rating.question_ref, []).append(rating)
    return {
        ref: _mean([_mean([r.scores[k] for k in CRITERION_KEYS]) for r in rs])
        for ref, rs in by_question.items()
    }


def aggregate(ratings: Iterable[QualityRating]) -> QualityAggregate:
    """Composite quality over a question set: judges first, then criteria.

    Per criterion, each question contributes the mean of its judges' scores;
    the reported per-criterion mean averages those per-question values, and
    the composite is the mean of the ten per-criterion means.
    """
    ratings = list(ratings)
    if not ratings:
        raise EmptyInputError("no ratings to aggregate")
    by_question: dict[str, list[QualityRating]] = {}
    judges: set[str] = set()
    for rating in ratings:
        by_question.setdefault(rating.question_ref, []).append(rating)
        judges.add(rating.judge_id)

    per_criterion: dict[str, float] = {}
    for key in CRITERION_KEYS:
        question_means = [_mean([r.scores[key] for r in rs]) for rs in by_question.values()]
        per_criterion[key] = _mean(question_means)
    composite = _mean(list(per_criterion.values()))

    incomplete = tuple(
        sorted(ref for ref, rs in by_question.items() if {r.judge_id for r in rs} != judges)
    )
    return QualityAggregate(
        per_criterion_mean=per_criterion,
        composite=composite,
        alpha=alpha_for_ratings(ratings),
        n_questions=len(by_question),
        n_judges=len(judges),
        incomplete_questions=incomplete,
    )


def rating_matrix(ratings: Iterable[QualityRating]) -> list[list[int | None]]:
    """Raters x items matrix, items being (question, criterion) pairs."""
    ratings = list(ratings)
    judges = sorted({r.judge_id for r in ratings})
    items = sorted({(r.question_ref, key) for r in ratings for key in CRITERION_KEYS})
    cell: dict[tuple[str, str, str], int] = {}
    for r in ratings:
        for key in CRITERION_KEYS:
            cell[(r.judge_id, r.question_ref, key)] = r.scores[key]
    return [[cell.get((judge, ref, key)) for ref, key in items] for judge in judges]


def alpha_for_ratings(ratings: Iterable[QualityRating]) -> float | None:
    """Alpha over (question, criterion) items; None when undefined."""
    matrix = rating_matrix(ratings)
    try:
        return krippendorff_alpha(matrix, level="ordinal")
    except (DegenerateDataError, ValueError):
        return None


def _ordinal_delta_sq(values: Sequence[float], freq: Mapping[float, int]) -> dict[tuple[float, float], float]:
    """Squared ordinal distance for every ordered value pair.

    Distance between scale points c <= k is the number of pairable values
    lying between them (inclusive), minus half the endpoint counts.
    """
    table: dict[tuple[float, float], float] = {}
    for i, c in enumerate(values):
        for j, k in enumerate(values):
            lo, hi = min(i, j), max(i, j)
            between = sum(freq[values[g]] for g in range(lo, hi + 1))
            d = between - (freq[c] + freq[k]) / 2.0
            table[(c, k)] = d * d if c != k else 0.0
    return table


def krippendorff_alpha(item_scores: Sequence[Sequence[float | int | None]], level: str = "ordinal") -> float:
    """Coincidence-matrix Krippendorff's alpha.

    ``item_scores`` is raters x items with None marking an absent rating.
    Items with fewer than two ratings are excluded pairwise. Raises
    DegenerateDataError when expected disagreement is zero (every pairable
    value identical), which makes alpha undefined.
    """
    if level != "ordinal":
        raise ValueError(f"unsupported measurement level {level!r}")
    if not item_scores:
        raise ValueError("empty score matrix")
    n_items = max(len(row) for row in item_scores)
    units: list[list[float]] = []
    for col in range(n_items):
        unit = [row[col] for row in item_scores if col < len(row) and row[col] is not None]
        if len(unit) >= 2:
            units.append([float(v) for v in unit])
    if len(units) < 2:
        raise ValueError("need at least two items with two or more ratings")

    freq: Counter = Counter(v for unit in units for v in unit)
    values = sorted(freq)
    if len(values) < 2:
        raise DegenerateDataError("all pairable values identical; expected disagreement is zero")
    delta_sq = _ordinal_delta_sq(values, freq)
    n = sum(freq.values())

    # Coincidence matrix: each ordered within-unit pair contributes 1/(m-1).
    coincidence: Counter = Counter()
    for unit in units:
        m = len(unit)
        for i, a in enumerate(unit):
            for j, b in enumerate(unit):
                if i != j:
                    coincidence[(a, b)] += 1.0 / (m - 1)

    observed = sum(weight * delta_sq[pair] for pair, weight in coincidence.items()) / n
    expected = sum(
        freq[c] * freq[k] * delta_sq[(c, k)] for c in values for k in values
    ) / (n * (n - 1))
    return 1.0 - observed / expected
