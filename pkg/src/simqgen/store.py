"""File-backed persistence: an append-only JSONL run store and a small
document store for sims, sessions, drafts, and one-off questions.

No database: JSONL records are inspectable, diff-able, and resume-friendly.
Appends are serialized by a process-local lock; an index sidecar lists the
cell keys already written so an interrupted run can resume by skipping them.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .errors import StoreError, UnknownIdError

RECORD_VERSION = 1


class RunStore:
    """Record store for one benchmark run directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"cannot create run directory {root}: {exc}") from exc
        self.records_path = self.root / "records.jsonl"
        self.index_path = self.root / "index.jsonl"
        self.ratings_path = self.root / "ratings.jsonl"
        self.plan_path = self.root / "plan.json"
        self._lock = threading.Lock()

    def write_plan(self, plan_doc: dict) -> None:
        try:
            self.plan_path.write_text(json.dumps(plan_doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StoreError(f"cannot write plan: {exc}") from exc

    def read_plan(self) -> dict:
        if not self.plan_path.exists():
            raise StoreError(f"no plan.json in {self.root}")
        return json.loads(self.plan_path.read_text(encoding="utf-8"))

    def append_record(self, cell_key: str, record_doc: dict) -> None:
        line = json.dumps(record_doc, sort_keys=True, ensure_ascii=False)
        with self._lock:
            try:
                with self.records_path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                with self.index_path.open("a", encoding="utf-8") as fh:
                    fh.write(cell_key + "\n")
            except OSError as exc:
                raise StoreError(f"cannot append record: {exc}") from exc

    def append_rating(self, rating_doc: dict) -> None:
        line = json.dumps(rating_doc, sort_keys=True, ensure_ascii=False)
        with self._lock:
            try:
                with self.ratings_path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            except OSError as exc:
                raise StoreError(f"cannot append rating: {exc}") from exc

    def completed_cells(self) -> set[str]:
        if not self.index_path.exists():
            return set()
        return {line.strip() for line in self.index_path.read_text(encoding="utf-8").splitlines() if line.strip()}

    def load_records(self) -> list[dict]:
        if not self.records_path.exists():
            return []
        records = []
        for line in self.records_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records

    def load_ratings(self) -> list[dict]:
        if not self.ratings_path.exists():
            return []
        ratings = []
        for line in self.ratings_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                ratings.append(json.loads(line))
        return ratings


class AppStore:
    """Document store behind the CLI and the HTTP service.

    One JSON file per document, grouped by kind; restarts lose nothing.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("sims", "sessions", "drafts", "questions"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str, doc_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in doc_id)
        return self.root / kind / f"{safe}.json"

    def put(self, kind: str, doc_id: str, doc: dict) -> None:
        path = self._path(kind, doc_id)
        with self._lock:
            try:
                path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
            except OSError as exc:
                raise StoreError(f"cannot write {kind}/{doc_id}: {exc}") from exc

    def get(self, kind: str, doc_id: str) -> dict:
        path = self._path(kind, doc_id)
        if not path.exists():
            raise UnknownIdError(f"no {kind[:-1]} with id {doc_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def exists(self, kind: str, doc_id: str) -> bool:
        return self._path(kind, doc_id).exists()

    def delete(self, kind: str, doc_id: str) -> None:
        path = self._path(kind, doc_id)
        if path.exists():
            path.unlink()

    def list_ids(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))

    def run_store(self, plan_id: str) -> RunStore:
        return RunStore(self.root / "runs" / plan_id)
