"""Benchmark matrix: plan construction, resumable execution, aggregation, and
report rendering.

A plan crosses conversations x 7 types x 5 formats x levels x models. Cells
whose type the simulation cannot ground are materialized as `unsupported`
records rather than dropped, so status counts always conserve the full
product. Execution is resumable: cells already in the store are skipped, and
record digests exclude wall-clock fields so an interrupted-and-resumed run
produces the same record set as a straight one.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from typing import Mapping, Sequence

from .canonical import digest_of, stable_seed
from .errors import EmptyStoreError
from .gateway import Gateway, ModelConfig, QuestionBundle, RawGeneration
from .judging import CRITERION_KEYS, QualityRating, aggregate as aggregate_quality, parse_rating, rubric_prompt
from .parsing import (
    FailureCode,
    ParsedQuestion,
    ValidityObservation,
    ValidityRecord,
    classify,
    score_validity,
)
from .prompts import TelerLevel, build_prompt
from .sim_model import SimulationRepresentation, from_json_dict, to_json_dict
from .store import RunStore
from .taxonomy import ContextSlice, QuestionFormat, QuestionType, context_for, supported_types

RECORD_VERSION = 1

DIMENSIONS = ("model", "teler_level", "format", "qtype")


class RecordStatus(str, Enum):
    ok = "ok"
    transport_failed = "transport_failed"
    invalid = "invalid"
    unsupported = "unsupported"


@dataclass(frozen=True)
class Conversation:
    conversation_id: str
    representation: SimulationRepresentation
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "conversation_id": self.conversation_id,
            "seed": self.seed,
            "representation": to_json_dict(self.representation),
        }


def conversation_from_json_dict(doc: dict) -> Conversation:
    return Conversation(
        conversation_id=doc["conversation_id"],
        representation=from_json_dict(doc["representation"], strict=False),
        seed=int(doc.get("seed", 0)),
    )


@dataclass(frozen=True)
class Cell:
    conversation_id: str
    sim_ref: str
    qtype: QuestionType
    format: QuestionFormat
    level: TelerLevel
    model_id: str

    def key(self) -> str:
        return "|".join(
            (self.conversation_id, self.qtype.value, self.format.value, self.level.value, self.model_id)
        )

    def sort_key(self) -> tuple:
        return (self.conversation_id, self.qtype.value, self.format.value, self.level.value, self.model_id)

    def to_json_dict(self) -> dict:
        return {
            "conversation": self.conversation_id,
            "sim_ref": self.sim_ref,
            "qtype": self.qtype.value,
            "format": self.format.value,
            "level": self.level.value,
            "model": self.model_id,
        }


@dataclass(frozen=True)
class RunPlan:
    plan_id: str
    conversations: tuple[Conversation, ...]
    models: tuple[ModelConfig, ...]
    levels: tuple[TelerLevel, ...]
    cells: tuple[Cell, ...]
    unsupported_cells: tuple[Cell, ...]

    def to_json_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "conversations": [c.to_json_dict() for c in self.conversations],
            "models": [m.to_json_dict() for m in self.models],
            "levels": [lv.value for lv in self.levels],
            "cells": [c.to_json_dict() for c in self.cells],
            "unsupported_cells": [c.to_json_dict() for c in self.unsupported_cells],
        }


def make_plan(
    conversations: Sequence[Conversation],
    models: Sequence[ModelConfig],
    levels: Sequence[TelerLevel],
    plan_id: str | None = None,
) -> RunPlan:
    """Cross the full matrix; cells are ordered lexically by
    (conversation, type, format, level, model)."""
    cells: list[Cell] = []
    unsupported: list[Cell] = []
    for conv in conversations:
        available = supported_types(conv.representation)
        for qtype in QuestionType:
            target = cells if qtype in available else unsupported
            for fmt in QuestionFormat:
                for level in levels:
                    for model in models:
                        target.append(
                            Cell(
                                conversation_id=conv.conversation_id,
                                sim_ref=conv.representation.sim_id,
                                qtype=qtype,
                                format=fmt,
                                level=level,
                                model_id=model.model_id,
                            )
                        )
    cells.sort(key=Cell.sort_key)
    unsupported.sort(key=Cell.sort_key)
    if plan_id is None:
        plan_id = "plan-" + digest_of(
            {
                "conversations": [c.to_json_dict() for c in conversations],
                "models": [m.model_id for m in models],
                "levels": [lv.value for lv in levels],
            }
        )[:12]
    return RunPlan(
        plan_id=plan_id,
        conversations=tuple(conversations),
        models=tuple(models),
        levels=tuple(levels),
        cells=tuple(cells),
        unsupported_cells=tuple(unsupported),
    )


def plan_from_doc(doc: dict) -> RunPlan:
    """Rebuild a plan from its stored document; cell derivation is
    deterministic, so the rebuilt plan matches the original."""
    conversations = [conversation_from_json_dict(d) for d in doc["conversations"]]
    models = [ModelConfig(**d) for d in doc["models"]]
    levels = [TelerLevel(v) for v in doc["levels"]]
    return make_plan(conversations, models, levels, plan_id=doc["plan_id"])


def cell_seed(conv: Conversation, qtype: QuestionType, level: TelerLevel) -> int:
    # Format and model are deliberately excluded: the five formats of a cell
    # family (and every model) share one context slice. The conversation seed
    # separates conversations that reuse the same simulation.
    return stable_seed(conv.representation.sim_id, str(conv.seed), qtype.value, level.value)


@dataclass(frozen=True)
class RunSummary:
    counts: Mapping[str, int]
    total: int

    def conserved(self, plan: RunPlan) -> bool:
        return self.total == len(plan.cells) + len(plan.unsupported_cells)


def _generation_doc(raw: RawGeneration) -> dict:
    return {
        "model_id": raw.model_id,
        "prompt_digest": raw.prompt_digest,
        "raw_text": raw.raw_text,
        "detail": raw.detail,
        "transport_status": raw.transport_status.value,
        "started_at": raw.started_at,
        "finished_at": raw.finished_at,
    }


def _validity_doc(record: ValidityRecord) -> dict:
    return {
        "json_ok": record.json_ok,
        "format_ok": record.format_ok,
        "failure": record.failure.value if record.failure else None,
    }


def validity_from_doc(doc: dict) -> ValidityRecord:
    return ValidityRecord(
        json_ok=doc["json_ok"],
        format_ok=doc["format_ok"],
        failure=FailureCode(doc["failure"]) if doc.get("failure") else None,
    )


def record_digest(doc: dict) -> str:
    """Digest over the stable fields only; wall-clock times excluded."""
    stable = {k: v for k, v in doc.items() if k != "generation"}
    generation = doc.get("generation")
    if generation:
        stable["generation"] = {
            k: v for k, v in generation.items() if k not in ("started_at", "finished_at")
        }
    return digest_of(stable)


def _execute_cell(
    conv: Conversation,
    cell: Cell,
    model: ModelConfig,
    gateway: Gateway,
    judge_configs: Sequence[ModelConfig],
) -> tuple[dict, list[dict]]:
    seed = cell_seed(conv, cell.qtype, cell.level)
    slice = context_for(conv.representation, cell.qtype, seed)
    pkg = build_prompt(slice, cell.format, cell.level)
    raw = gateway.generate(pkg, model)
    ratings: list[dict] = []
    if not raw.ok:
        validity = ValidityRecord(json_ok=False, format_ok=None, failure=FailureCode.no_json)
        status, question = RecordStatus.transport_failed, None
    else:
        validity, question = classify(raw.raw_text, cell.format)
        status = RecordStatus.ok if validity.fully_valid() else RecordStatus.invalid
        if question is not None and judge_configs:
            ratings = _judge_question(cell.key(), question, slice, gateway, judge_configs)
    doc = {
        "v": RECORD_VERSION,
        "cell": cell.to_json_dict(),
        "seed": seed,
        "slice_digest": pkg.slice_digest,
        "prompt_digest": raw.prompt_digest,
        "generation": _generation_doc(raw),
        "validity": _validity_doc(validity),
        "question": dict(question.payload) if question else None,
        "status": status.value,
    }
    return doc, ratings


def _judge_question(
    question_ref: str,
    question: ParsedQuestion,
    slice: ContextSlice,
    gateway: Gateway,
    judge_configs: Sequence[ModelConfig],
) -> list[dict]:
    prompt_text, _ = rubric_prompt(question, slice)
    bundle = QuestionBundle(question=question, slice=slice, rubric_prompt=prompt_text)
    docs = []
    for judge_cfg in judge_configs:
        raw = gateway.judge_rate(bundle, judge_cfg)
        doc = {"question_ref": question_ref, "judge_id": judge_cfg.model_id, "scores": None, "failure": None}
        if not raw.ok:
            doc["failure"] = raw.transport_status.value
        else:
            rating = parse_rating(raw.raw_text, judge_cfg.model_id, question_ref)
            if isinstance(rating, QualityRating):
                doc["scores"] = dict(rating.scores)
            else:
                doc["failure"] = rating.code.value
        docs.append(doc)
    return docs


def judge_existing(
    store: RunStore,
    gateway: Gateway,
    judge_configs: Sequence[ModelConfig],
    parallelism: int = 4,
) -> int:
    """Rate every parsed question already in the store.

    Context slices are recomputed from the stored plan (seeding is
    deterministic), so generation records stay slim. (question, judge) pairs
    that already have a rating line are skipped, making this resumable too.
    """
    plan = plan_from_doc(store.read_plan())
    conversations = {c.conversation_id: c for c in plan.conversations}
    already = {(doc["question_ref"], doc["judge_id"]) for doc in store.load_ratings()}
    tasks = []
    for record in store.load_records():
        if record["status"] != RecordStatus.ok.value or record.get("question") is None:
            continue
        key = _cell_key_of(record)
        pending = [j for j in judge_configs if (key, j.model_id) not in already]
        if not pending:
            continue
        cell = record["cell"]
        conv = conversations[cell["conversation"]]
        slice = context_for(conv.representation, QuestionType(cell["qtype"]), record["seed"])
        question = ParsedQuestion(format=QuestionFormat(cell["format"]), payload=record["question"])
        tasks.append((key, question, slice, pending))

    def run_one(task) -> int:
        key, question, slice, pending = task
        docs = _judge_question(key, question, slice, gateway, pending)
        for doc in docs:
            store.append_rating(doc)
        return sum(1 for doc in docs if doc["scores"] is not None)

    if parallelism <= 1:
        return sum(run_one(task) for task in tasks)
    with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
        return sum(pool.map(run_one, tasks))


def execute(
    plan: RunPlan,
    gateway: Gateway,
    store: RunStore,
    parallelism: int = 4,
    judge_configs: Sequence[ModelConfig] = (),
) -> RunSummary:
    """Run every cell once; idempotent on resume.

    Transport failures become records, never exceptions; only storage
    problems abort the run.
    """
    store.write_plan(plan.to_json_dict())
    done = store.completed_cells()
    conversations = {c.conversation_id: c for c in plan.conversations}
    models = {m.model_id: m for m in plan.models}

    for cell in plan.unsupported_cells:
        if cell.key() in done:
            continue
        doc = {
            "v": RECORD_VERSION,
            "cell": cell.to_json_dict(),
            "seed": None,
            "slice_digest": None,
            "prompt_digest": None,
            "generation": None,
            "validity": None,
            "question": None,
            "status": RecordStatus.unsupported.value,
        }
        store.append_record(cell.key(), doc)
        done.add(cell.key())

    pending = [cell for cell in plan.cells if cell.key() not in done]

    def run_one(cell: Cell) -> None:
        doc, ratings = _execute_cell(
            conversations[cell.conversation_id], cell, models[cell.model_id], gateway, judge_configs
        )
        store.append_record(cell.key(), doc)
        for rating_doc in ratings:
            store.append_rating(rating_doc)

    if parallelism <= 1:
        for cell in pending:
            run_one(cell)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
            for future in [pool.submit(run_one, cell) for cell in pending]:
                future.result()

    counts: dict[str, int] = {}
    for record in store.load_records():
        counts[record["status"]] = counts.get(record["status"], 0) + 1
    return RunSummary(counts=counts, total=sum(counts.values()))


@dataclass(frozen=True)
class ReportTable:
    title: str
    key_header: str
    columns: tuple[str, ...]
    rows: tuple[tuple[str, tuple[float | None, ...]], ...]


@dataclass(frozen=True)
class DimensionReport:
    dimension: str
    validity: ReportTable
    quality: ReportTable | None


_DIMENSION_HEADERS = {
    "model": "model",
    "teler_level": "teler_level",
    "format": "question_format",
    "qtype": "question_type",
}


def _dimension_value(record: dict, dimension: str) -> str:
    cell = record["cell"]
    return {
        "model": cell["model"],
        "teler_level": cell["level"],
        "format": cell["format"],
        "qtype": cell["qtype"],
    }[dimension]


def _dimension_order(dimension: str, present: set[str]) -> list[str]:
    if dimension == "teler_level":
        declared = [lv.value for lv in TelerLevel]
    elif dimension == "format":
        declared = [f.value for f in QuestionFormat]
    elif dimension == "qtype":
        declared = [t.value for t in QuestionType]
    else:
        return sorted(present)
    return [v for v in declared if v in present]


def aggregate(store: RunStore, group_by: str) -> DimensionReport:
    """Validity and quality tables grouped along one dimension.

    The existence-scoring group is always (model, conversation, qtype, level);
    restricting records to one dimension value then averaging group scores
    reproduces each reporting view. Format-dimension validity tables omit the
    JSON column: parsing precedes format checking, so a JSON rate keyed by the
    requested format is not measurable.
    """
    if group_by not in DIMENSIONS:
        raise ValueError(f"group_by must be one of {DIMENSIONS}")
    records = store.load_records()
    if not records:
        raise EmptyStoreError(f"no records in {store.root}")
    scored = [r for r in records if r["status"] != RecordStatus.unsupported.value]

    present = {_dimension_value(r, group_by) for r in scored}
    ordered = _dimension_order(group_by, present)

    include_json = group_by != "format"
    validity_columns = (("json_accuracy",) if include_json else ()) + ("format_accuracy", "existence_score")
    validity_rows = []
    for value in ordered:
        subset = [r for r in scored if _dimension_value(r, group_by) == value]
        observations = [
            ValidityObservation(
                group=(r["cell"]["model"], r["cell"]["conversation"], r["cell"]["qtype"], r["cell"]["level"]),
                format=QuestionFormat(r["cell"]["format"]),
                record=validity_from_doc(r["validity"]),
            )
            for r in subset
        ]
        agg = score_validity(observations)
        metrics = ((agg.json_accuracy,) if include_json else ()) + (agg.format_accuracy, agg.existence_score)
        validity_rows.append((value, metrics))
    validity_table = ReportTable(
        title=f"Validity by {_DIMENSION_HEADERS[group_by]}",
        key_header=_DIMENSION_HEADERS[group_by],
        columns=validity_columns,
        rows=tuple(validity_rows),
    )

    ratings_by_ref: dict[str, list[QualityRating]] = {}
    for doc in store.load_ratings():
        if doc.get("scores"):
            rating = QualityRating(
                judge_id=doc["judge_id"],
                question_ref=doc["question_ref"],
                scores={k: int(v) for k, v in doc["scores"].items()},
            )
            ratings_by_ref.setdefault(doc["question_ref"], []).append(rating)

    quality_table = None
    if ratings_by_ref:
        record_by_key = {_cell_key_of(r): r for r in scored}
        quality_rows = []
        for value in ordered:
            bucket: list[QualityRating] = []
            for ref, ratings in ratings_by_ref.items():
                record = record_by_key.get(ref)
                if record is not None and _dimension_value(record, group_by) == value:
                    bucket.extend(ratings)
            if not bucket:
                continue
            agg = aggregate_quality(bucket)
            metrics = tuple(agg.per_criterion_mean[k] for k in CRITERION_KEYS) + (agg.composite, agg.alpha)
            quality_rows.append((value, metrics))
        if quality_rows:
            quality_table = ReportTable(
                title=f"Quality by {_DIMENSION_HEADERS[group_by]}",
                key_header=_DIMENSION_HEADERS[group_by],
                columns=CRITERION_KEYS + ("average", "alpha_k"),
                rows=tuple(quality_rows),
            )

    return DimensionReport(dimension=group_by, validity=validity_table, quality=quality_table)


def _cell_key_of(record: dict) -> str:
    cell = record["cell"]
    return "|".join((cell["conversation"], cell["qtype"], cell["format"], cell["level"], cell["model"]))


def format_value(value: float | None) -> str:
    """3-decimal rendering, round half up: 4.2455 -> '4.246'."""
    if value is None:
        return ""
    return str(Decimal(str(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def _column_maxima(table: ReportTable) -> list[float | None]:
    maxima: list[float | None] = []
    for i in range(len(table.columns)):
        values = [row[1][i] for row in table.rows if row[1][i] is not None]
        maxima.append(max(values) if values else None)
    return maxima


def render_markdown_table(table: ReportTable) -> str:
    """Pipe table with the top performer per column in bold."""
    maxima = _column_maxima(table)
    lines = [f"## {table.title}", ""]
    lines.append("| " + " | ".join((table.key_header,) + table.columns) + " |")
    lines.append("|" + "---|" * (len(table.columns) + 1))
    for label, values in table.rows:
        cells = [label]
        for i, value in enumerate(values):
            text = format_value(value)
            if text and maxima[i] is not None and value == maxima[i]:
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)


def render_csv_table(table: ReportTable) -> str:
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow((table.key_header,) + table.columns)
    for label, values in table.rows:
        writer.writerow([label] + [format_value(v) for v in values])
    return buffer.getvalue()


def render_report(tables: Sequence[ReportTable], target: str) -> str:
    """Render tables as one markdown or csv document."""
    if not tables:
        raise ValueError("no tables to render")
    if target == "markdown":
        return "\n\n".join(render_markdown_table(t) for t in tables) + "\n"
    if target == "csv":
        return "\n".join(render_csv_table(t) for t in tables)
    raise ValueError(f"unknown render target {target!r}")


def report_tables(report: DimensionReport) -> list[ReportTable]:
    tables = [report.validity]
    if report.quality is not None:
        tables.append(report.quality)
    return tables
