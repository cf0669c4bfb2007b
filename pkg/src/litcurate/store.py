"""Project persistence and curation orchestration over an embedded
single-file SQLite store.

Mutations are funnelled through one writer lock; batch generation runs
against an immutable pool snapshot outside the lock, so corrections made
mid-batch only influence later batches.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import sqlite3
import threading
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .aligner import align_record_sets, make_embedding_provider
from .config import EngineConfig
from .errors import (
    AlreadyLocked,
    DocsNotIngested,
    DuplicateName,
    EngineError,
    InvalidConfig,
    NoBatches,
    NotFound,
    PilotCapExceeded,
    RecordLocked,
    UnknownColumn,
)
from .generator import generate_records
from .ingest.documents import ParsedDocument, ParserKind, TableBlock, segment_paragraphs
from .ingest.parsers import attach_tables, ingest_path, table_blocks_from_html
from .llm import make_llm_provider
from .pool import CorrectionPool, PoolEntry
from .records import RecordOrigin, Schema
from .verify import (
    MatchGrade,
    build_explanation_prompt,
    provenance_check,
    supporting_paragraphs,
)


class InvalidTransition(EngineError):
    code = "invalid_transition"


PHASE_PILOT = "pilot"
PHASE_BATCH = "batch"

EVENT_UPDATING_VALUE = "updating_value"
EVENT_LOCKING_DATA = "locking_data"
EVENT_SETTING_IRRELEVANT = "setting_irrelevant"
EVENT_VETTING_VIEWED = "vetting_viewed"
EVENT_EXPLANATION_REQUESTED = "explanation_requested"

_SCHEMA_VERSION = 1

_DDL = [
    """
    CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
    CREATE TABLE IF NOT EXISTS projects (
        project_id INTEGER PRIMARY KEY AUTOINCREMENT,
        name TEXT UNIQUE NOT NULL,
        schema_json TEXT NOT NULL,
        retired_columns_json TEXT NOT NULL DEFAULT '[]',
        config_json TEXT NOT NULL DEFAULT '{}',
        pool_version INTEGER NOT NULL DEFAULT 0,
        created_at TEXT NOT NULL
    );
    CREATE TABLE IF NOT EXISTS documents (
        doc_key INTEGER PRIMARY KEY AUTOINCREMENT,
        project_id INTEGER NOT NULL REFERENCES projects(project_id),
        doc_id TEXT NOT NULL,
        source_uri TEXT NOT NULL DEFAULT '',
        status TEXT NOT NULL,
        parsed_json TEXT,
        position INTEGER NOT NULL,
        UNIQUE(project_id, doc_id)
    );
    CREATE TABLE IF NOT EXISTS batches (
        batch_id INTEGER PRIMARY KEY AUTOINCREMENT,
        project_id INTEGER NOT NULL REFERENCES projects(project_id),
        phase TEXT NOT NULL,
        doc_ids_json TEXT NOT NULL,
        failures_json TEXT NOT NULL DEFAULT '{}',
        pool_version_used INTEGER NOT NULL,
        position INTEGER NOT NULL,
        created_at TEXT NOT NULL
    );
    CREATE TABLE IF NOT EXISTS records (
        record_id INTEGER PRIMARY KEY AUTOINCREMENT,
        project_id INTEGER NOT NULL REFERENCES projects(project_id),
        batch_id INTEGER NOT NULL REFERENCES batches(batch_id),
        doc_id TEXT NOT NULL,
        origin TEXT NOT NULL,
        status TEXT NOT NULL,
        cells_json TEXT NOT NULL,
        generated_cells_json TEXT NOT NULL,
        alt_json TEXT,
        version INTEGER NOT NULL DEFAULT 0,
        position INTEGER NOT NULL
    );
    CREATE TABLE IF NOT EXISTS pool_entries (
        project_id INTEGER NOT NULL REFERENCES projects(project_id),
        doc_id TEXT NOT NULL,
        text TEXT NOT NULL,
        records_json TEXT NOT NULL,
        PRIMARY KEY(project_id, doc_id)
    );
    CREATE TABLE IF NOT EXISTS audit_events (
        event_id INTEGER PRIMARY KEY AUTOINCREMENT,
        project_id INTEGER NOT NULL REFERENCES projects(project_id),
        actor TEXT NOT NULL,
        kind TEXT NOT NULL,
        record_id INTEGER,
        column_name TEXT,
        before_value TEXT,
        after_value TEXT,
        created_at TEXT NOT NULL
    );
    """
]

_STATUS_TRANSITIONS = {
    "generated": {"edited", "locked", "irrelevant"},
    "edited": {"locked", "irrelevant"},
    "locked": {"edited"},  # explicit unlock only
    "irrelevant": {"generated", "edited"},  # explicit un-mark only
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _doc_to_json(doc: ParsedDocument) -> str:
    return json.dumps(
        {
            "doc_id": doc.doc_id,
            "source_uri": doc.source_uri,
            "variants": {k.value: v for k, v in doc.variants.items()},
            "tables": [
                {"markdown": t.markdown, "caption": t.caption, "anchor": t.anchor_char_offset}
                for t in doc.tables
            ],
            "ocr_applied": doc.ocr_applied,
            "failures": {k.value: v for k, v in doc.failures.items()},
        },
        ensure_ascii=False,
    )


def _doc_from_json(raw: str) -> ParsedDocument:
    data = json.loads(raw)
    doc = ParsedDocument(
        doc_id=data["doc_id"],
        source_uri=data.get("source_uri", ""),
        ocr_applied=data.get("ocr_applied", False),
    )
    for kind_value, text in data.get("variants", {}).items():
        kind = ParserKind(kind_value)
        doc.variants[kind] = text
        doc.paragraphs[kind] = segment_paragraphs(text)
    doc.tables = [
        TableBlock(t["markdown"], t.get("caption", ""), t.get("anchor", 0))
        for t in data.get("tables", [])
    ]
    doc.failures = {ParserKind(k): v for k, v in data.get("failures", {}).items()}
    return doc


def _grade_to_json(grade: MatchGrade | None):
    if grade is None:
        return None
    return {
        "ratio": grade.ratio,
        "band": grade.band.value,
        "span": list(grade.best_span) if grade.best_span else None,
    }


class Store:
    """Single-deployment store; one writer at a time, many readers."""

    def __init__(
        self,
        db_path: str | Path,
        cfg: EngineConfig | None = None,
        llm=None,
        embedder=None,
        parser_clients: Sequence = (),
    ):
        self.cfg = cfg or EngineConfig()
        self.db = sqlite3.connect(str(db_path), check_same_thread=False)
        self.db.row_factory = sqlite3.Row
        self.db.execute("PRAGMA journal_mode=WAL")
        self._lock = threading.RLock()
        self._llm = llm
        self._embedder = embedder
        self.parser_clients = list(parser_clients)
        self._migrate()

    # --- infrastructure ---

    def _migrate(self) -> None:
        with self._lock, self.db:
            for statement_block in _DDL:
                self.db.executescript(statement_block)
            self.db.execute(
                "INSERT OR IGNORE INTO meta(key, value) VALUES('schema_version', ?)",
                (str(_SCHEMA_VERSION),),
            )

    @property
    def llm(self):
        if self._llm is None:
            self._llm = make_llm_provider(self.cfg)
        return self._llm

    @property
    def embedder(self):
        if self._embedder is None:
            self._embedder = make_embedding_provider(self.cfg)
        return self._embedder

    def close(self) -> None:
        self.db.close()

    def _audit(self, project_id, actor, kind, record_id=None, column=None, before=None, after=None):
        self.db.execute(
            "INSERT INTO audit_events(project_id, actor, kind, record_id, column_name,"
            " before_value, after_value, created_at) VALUES(?,?,?,?,?,?,?,?)",
            (project_id, actor, kind, record_id, column, before, after, _now()),
        )

    # --- projects & documents ---

    def create_project(
        self,
        name: str,
        schema_text: str,
        document_uris: Sequence[str] = (),
    ) -> dict:
        """Create a project from a schema file's content and optionally
        ingest an initial set of local documents."""
        schema = Schema.parse(schema_text)
        config_snapshot = json.dumps(dataclasses.asdict(self.cfg), ensure_ascii=False)
        with self._lock, self.db:
            try:
                cursor = self.db.execute(
                    "INSERT INTO projects(name, schema_json, config_json, created_at)"
                    " VALUES(?,?,?,?)",
                    (
                        name,
                        json.dumps(schema.to_json(), ensure_ascii=False),
                        config_snapshot,
                        _now(),
                    ),
                )
            except sqlite3.IntegrityError as exc:
                raise DuplicateName(f"project name already exists: {name}") from exc
            project_id = cursor.lastrowid
        for uri in document_uris:
            doc_id = Path(uri).stem
            self.add_document(project_id, doc_id, path=uri)
        return self.get_project(project_id)

    def add_document(
        self,
        project_id: int,
        doc_id: str,
        *,
        text: str | None = None,
        tei_xml: str | None = None,
        path: str | None = None,
        tables: Sequence[dict] = (),
    ) -> dict:
        """Register and immediately preprocess one document."""
        self._project_row(project_id)
        doc = ParsedDocument(doc_id=doc_id, source_uri=path or "")
        status = "ingested"
        try:
            if path is not None:
                doc = ingest_path(
                    doc_id, path, clients=self.parser_clients, ocr_command=self.cfg.ocr_command
                )
            elif tei_xml is not None:
                from .ingest.parsers import tei_to_text

                flattened = tei_to_text(tei_xml)
                doc.variants[ParserKind.STRUCTURED_TEI] = flattened
                doc.paragraphs[ParserKind.STRUCTURED_TEI] = segment_paragraphs(flattened)
            elif text is not None:
                if text.strip():
                    doc.variants[ParserKind.GENERIC_TEXT] = text
                    doc.paragraphs[ParserKind.GENERIC_TEXT] = segment_paragraphs(text)
                else:
                    doc.failures[ParserKind.GENERIC_TEXT] = "document text is empty"
            else:
                raise InvalidConfig("add_document needs text, tei_xml, or path")
            if tables:
                attach_tables(doc, table_blocks_from_html(list(tables)))
        except EngineError as exc:
            if isinstance(exc, InvalidConfig):
                raise
            doc.failures[ParserKind.GENERIC_TEXT] = str(exc)
        if doc.failed:
            status = "failed"
        with self._lock, self.db:
            position = self.db.execute(
                "SELECT COUNT(*) FROM documents WHERE project_id=?", (project_id,)
            ).fetchone()[0]
            try:
                self.db.execute(
                    "INSERT INTO documents(project_id, doc_id, source_uri, status,"
                    " parsed_json, position) VALUES(?,?,?,?,?,?)",
                    (project_id, doc_id, doc.source_uri, status, _doc_to_json(doc), position),
                )
            except sqlite3.IntegrityError as exc:
                raise DuplicateName(f"doc_id already exists in project: {doc_id}") from exc
        return {"doc_id": doc_id, "status": status, "failures": {k.value: v for k, v in doc.failures.items()}}

    def _project_row(self, project_id: int) -> sqlite3.Row:
        row = self.db.execute(
            "SELECT * FROM projects WHERE project_id=?", (project_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no such project: {project_id}")
        return row

    def project_schema(self, project_id: int) -> Schema:
        row = self._project_row(project_id)
        return Schema.parse(row["schema_json"])

    def update_schema(self, project_id: int, schema_text: str) -> dict:
        """Replace the schema; columns that disappear are retired, not lost."""
        new_schema = Schema.parse(schema_text)
        with self._lock, self.db:
            row = self._project_row(project_id)
            old = Schema.parse(row["schema_json"])
            retired = set(json.loads(row["retired_columns_json"]))
            retired |= set(old.column_names) - set(new_schema.column_names)
            retired -= set(new_schema.column_names)
            self.db.execute(
                "UPDATE projects SET schema_json=?, retired_columns_json=? WHERE project_id=?",
                (
                    json.dumps(new_schema.to_json(), ensure_ascii=False),
                    json.dumps(sorted(retired), ensure_ascii=False),
                    project_id,
                ),
            )
        return self.get_project(project_id)

    def get_project(self, project_id: int) -> dict:
        row = self._project_row(project_id)
        docs = self.db.execute(
            "SELECT doc_id, source_uri, status, position FROM documents"
            " WHERE project_id=? ORDER BY position",
            (project_id,),
        ).fetchall()
        batches = self.db.execute(
            "SELECT batch_id, phase, position, pool_version_used, created_at FROM batches"
            " WHERE project_id=? ORDER BY position",
            (project_id,),
        ).fetchall()
        return {
            "project_id": row["project_id"],
            "name": row["name"],
            "schema": json.loads(row["schema_json"]),
            "retired_columns": json.loads(row["retired_columns_json"]),
            "config": json.loads(row["config_json"]),
            "pool_version": row["pool_version"],
            "documents": [dict(d) for d in docs],
            "samples": [dict(b) for b in batches],
        }

    def find_project_by_name(self, name: str) -> dict | None:
        row = self.db.execute(
            "SELECT project_id FROM projects WHERE name=?", (name,)
        ).fetchone()
        return self.get_project(row["project_id"]) if row else None

    def load_parsed_document(self, project_id: int, doc_id: str) -> ParsedDocument:
        row = self.db.execute(
            "SELECT parsed_json, status FROM documents WHERE project_id=? AND doc_id=?",
            (project_id, doc_id),
        ).fetchone()
        if row is None or row["parsed_json"] is None:
            raise NotFound(f"no parsed document {doc_id} in project {project_id}")
        return _doc_from_json(row["parsed_json"])

    # --- pool ---

    def load_pool(self, project_id: int) -> CorrectionPool:
        row = self._project_row(project_id)
        entries = self.db.execute(
            "SELECT doc_id, text, records_json FROM pool_entries WHERE project_id=?"
            " ORDER BY doc_id",
            (project_id,),
        ).fetchall()
        return CorrectionPool(
            entries=tuple(
                PoolEntry(
                    doc_id=e["doc_id"],
                    text=e["text"],
                    records=tuple(json.loads(e["records_json"])),
                )
                for e in entries
            ),
            version=row["pool_version"],
        )

    def _rebuild_pool_entry(self, project_id: int, doc_id: str) -> None:
        """Recompute one doc's pool entry from its LOCKED records."""
        rows = self.db.execute(
            "SELECT cells_json FROM records WHERE project_id=? AND doc_id=? AND status='locked'"
            " ORDER BY record_id",
            (project_id, doc_id),
        ).fetchall()
        if not rows:
            self.db.execute(
                "DELETE FROM pool_entries WHERE project_id=? AND doc_id=?",
                (project_id, doc_id),
            )
            return
        values = []
        for row in rows:
            cells = json.loads(row["cells_json"])
            values.append({name: cell["value"] for name, cell in cells.items()})
        doc = self.load_parsed_document(project_id, doc_id)
        self.db.execute(
            "INSERT OR REPLACE INTO pool_entries(project_id, doc_id, text, records_json)"
            " VALUES(?,?,?,?)",
            (project_id, doc_id, doc.preferred_text(), json.dumps(values, ensure_ascii=False)),
        )

    def _bump_pool_version(self, project_id: int) -> int:
        self.db.execute(
            "UPDATE projects SET pool_version = pool_version + 1 WHERE project_id=?",
            (project_id,),
        )
        return self.db.execute(
            "SELECT pool_version FROM projects WHERE project_id=?", (project_id,)
        ).fetchone()[0]

    # --- batches ---

    def run_batch(
        self,
        project_id: int,
        doc_ids: Sequence[str],
        phase: str,
        actor: str = "system",
        before_generation: Callable[[int], None] | None = None,
    ) -> dict:
        """Generate, align, and provenance-grade records for a set of docs.

        The correction pool is snapshotted up front; generation runs without
        the writer lock so concurrent curation stays possible.
        """
        if phase not in (PHASE_PILOT, PHASE_BATCH):
            raise InvalidConfig(f"unknown phase: {phase}")
        if phase == PHASE_PILOT and len(doc_ids) > self.cfg.pilot_cap:
            raise PilotCapExceeded(
                f"pilot batches are capped at {self.cfg.pilot_cap} documents,"
                f" got {len(doc_ids)}"
            )
        schema = self.project_schema(project_id)
        docs: dict[str, ParsedDocument] = {}
        not_ready = []
        for doc_id in doc_ids:
            row = self.db.execute(
                "SELECT status, parsed_json FROM documents WHERE project_id=? AND doc_id=?",
                (project_id, doc_id),
            ).fetchone()
            if row is None or row["status"] != "ingested":
                not_ready.append(doc_id)
                continue
            docs[doc_id] = _doc_from_json(row["parsed_json"])
        if not_ready:
            raise DocsNotIngested(f"documents not ingested: {not_ready}", offenders=not_ready)

        with self._lock, self.db:
            pool = self.load_pool(project_id).snapshot()
            position = (
                self.db.execute(
                    "SELECT COUNT(*) FROM batches WHERE project_id=?", (project_id,)
                ).fetchone()[0]
                + 1
            )
            cursor = self.db.execute(
                "INSERT INTO batches(project_id, phase, doc_ids_json, pool_version_used,"
                " position, created_at) VALUES(?,?,?,?,?,?)",
                (
                    project_id,
                    phase,
                    json.dumps(list(doc_ids)),
                    pool.version,
                    position,
                    _now(),
                ),
            )
            batch_id = cursor.lastrowid

        if before_generation is not None:
            before_generation(batch_id)

        def process(doc_id: str):
            doc = docs[doc_id]
            dual = generate_records(doc, schema, pool, self.llm, self.cfg)
            merged = align_record_sets(
                dual.get(RecordOrigin.STRUCTURED_TEI),
                dual.get(RecordOrigin.GENERIC_TEXT),
                schema,
                self.embedder,
                self.cfg.suggest_threshold,
            )
            for record in merged:
                for name, cell in record.cells.items():
                    cell.provenance = provenance_check(
                        cell.value, doc, self.cfg.supported_band, self.cfg.partial_band
                    )
            return merged

        generated = []  # (doc_id, records) in doc_ids order
        failures: dict[str, str] = {}
        workers = self.cfg.jobs or (os.cpu_count() or 1)
        if workers > 1 and len(doc_ids) > 1:
            with ThreadPoolExecutor(max_workers=min(workers, len(doc_ids))) as executor:
                futures = {doc_id: executor.submit(process, doc_id) for doc_id in doc_ids}
            outcomes = {doc_id: future for doc_id, future in futures.items()}
        else:
            outcomes = None
        for doc_id in doc_ids:
            try:
                merged = outcomes[doc_id].result() if outcomes else process(doc_id)
            except EngineError as exc:
                failures[doc_id] = str(exc)
                continue
            generated.append((doc_id, merged))

        with self._lock, self.db:
            for doc_id, merged in generated:
                for pos, record in enumerate(merged):
                    cells_json = json.dumps(
                        {
                            name: {
                                "value": cell.value,
                                "edited": cell.edited,
                                "provenance": _grade_to_json(cell.provenance),
                            }
                            for name, cell in record.cells.items()
                        },
                        ensure_ascii=False,
                    )
                    alt_json = None
                    if record.alt_values is not None:
                        alt_json = json.dumps(
                            {
                                "values": record.alt_values,
                                "origin": record.alt_origin.value if record.alt_origin else None,
                                "score": record.alt_score,
                            },
                            ensure_ascii=False,
                        )
                    generated_values = json.dumps(record.values(), ensure_ascii=False)
                    self.db.execute(
                        "INSERT INTO records(project_id, batch_id, doc_id, origin, status,"
                        " cells_json, generated_cells_json, alt_json, position)"
                        " VALUES(?,?,?,?,?,?,?,?,?)",
                        (
                            project_id,
                            batch_id,
                            doc_id,
                            record.origin.value,
                            "generated",
                            cells_json,
                            generated_values,
                            alt_json,
                            pos,
                        ),
                    )
            self.db.execute(
                "UPDATE batches SET failures_json=? WHERE batch_id=?",
                (json.dumps(failures, ensure_ascii=False), batch_id),
            )
        return self.get_batch(batch_id)

    def get_batch(self, batch_id: int) -> dict:
        row = self.db.execute(
            "SELECT * FROM batches WHERE batch_id=?", (batch_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no such batch: {batch_id}")
        records = self.db.execute(
            "SELECT record_id FROM records WHERE batch_id=? ORDER BY record_id",
            (batch_id,),
        ).fetchall()
        return {
            "batch_id": row["batch_id"],
            "project_id": row["project_id"],
            "phase": row["phase"],
            "position": row["position"],
            "doc_ids": json.loads(row["doc_ids_json"]),
            "failures": json.loads(row["failures_json"]),
            "pool_version_used": row["pool_version_used"],
            "created_at": row["created_at"],
            "records": [self.get_record(r["record_id"]) for r in records],
        }

    # --- records & curation ---

    def _record_row(self, record_id: int) -> sqlite3.Row:
        row = self.db.execute(
            "SELECT * FROM records WHERE record_id=?", (record_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no such record: {record_id}")
        return row

    def get_record(self, record_id: int) -> dict:
        row = self._record_row(record_id)
        return {
            "record_id": row["record_id"],
            "project_id": row["project_id"],
            "batch_id": row["batch_id"],
            "doc_id": row["doc_id"],
            "origin": row["origin"],
            "status": row["status"],
            "cells": json.loads(row["cells_json"]),
            "generated_values": json.loads(row["generated_cells_json"]),
            "alt": json.loads(row["alt_json"]) if row["alt_json"] else None,
            "version": row["version"],
        }

    def _transition(self, row: sqlite3.Row, new_status: str) -> None:
        current = row["status"]
        if new_status not in _STATUS_TRANSITIONS.get(current, set()):
            raise InvalidTransition(f"cannot move record from {current} to {new_status}")

    def apply_edit(self, record_id: int, column: str, new_value: str, actor: str) -> dict:
        """Human correction of one cell; provenance is recomputed."""
        with self._lock, self.db:
            row = self._record_row(record_id)
            if row["status"] == "locked":
                raise RecordLocked(f"record {record_id} is locked")
            schema = self.project_schema(row["project_id"])
            if column not in schema.column_names:
                raise UnknownColumn(f"column not in schema: {column}")
            cells = json.loads(row["cells_json"])
            before = cells.get(column, {}).get("value", "")
            doc = self.load_parsed_document(row["project_id"], row["doc_id"])
            grade = provenance_check(
                new_value, doc, self.cfg.supported_band, self.cfg.partial_band
            )
            cells[column] = {
                "value": new_value,
                "edited": True,
                "provenance": _grade_to_json(grade),
            }
            new_status = "edited" if row["status"] == "generated" else row["status"]
            self.db.execute(
                "UPDATE records SET cells_json=?, status=?, version=version+1 WHERE record_id=?",
                (json.dumps(cells, ensure_ascii=False), new_status, record_id),
            )
            self._audit(
                row["project_id"], actor, EVENT_UPDATING_VALUE, record_id, column, before, new_value
            )
        return self.get_record(record_id)

    def lock_record(self, record_id: int, actor: str) -> dict:
        """Verify a record: lock it and feed it into the correction pool."""
        with self._lock, self.db:
            row = self._record_row(record_id)
            if row["status"] == "locked":
                raise AlreadyLocked(f"record {record_id} is already locked")
            if row["status"] == "irrelevant":
                raise InvalidTransition("cannot lock an irrelevant record")
            self._transition(row, "locked")
            self.db.execute(
                "UPDATE records SET status='locked', version=version+1 WHERE record_id=?",
                (record_id,),
            )
            self._rebuild_pool_entry(row["project_id"], row["doc_id"])
            version = self._bump_pool_version(row["project_id"])
            self._audit(
                row["project_id"], actor, EVENT_LOCKING_DATA, record_id,
                before=row["status"], after="locked",
            )
        return {"record": self.get_record(record_id), "pool_version": version}

    def unlock_record(self, record_id: int, actor: str) -> dict:
        with self._lock, self.db:
            row = self._record_row(record_id)
            if row["status"] != "locked":
                raise InvalidTransition(f"record {record_id} is not locked")
            self.db.execute(
                "UPDATE records SET status='edited', version=version+1 WHERE record_id=?",
                (record_id,),
            )
            self._rebuild_pool_entry(row["project_id"], row["doc_id"])
            version = self._bump_pool_version(row["project_id"])
            self._audit(
                row["project_id"], actor, EVENT_LOCKING_DATA, record_id,
                before="locked", after="edited",
            )
        return {"record": self.get_record(record_id), "pool_version": version}

    def mark_irrelevant(self, record_id: int, actor: str) -> dict:
        with self._lock, self.db:
            row = self._record_row(record_id)
            if row["status"] == "locked":
                raise RecordLocked("unlock the record before marking it irrelevant")
            if row["status"] == "irrelevant":
                return self.get_record(record_id)
            self._transition(row, "irrelevant")
            self.db.execute(
                "UPDATE records SET status='irrelevant', version=version+1 WHERE record_id=?",
                (record_id,),
            )
            self._audit(
                row["project_id"], actor, EVENT_SETTING_IRRELEVANT, record_id,
                before=row["status"], after="irrelevant",
            )
        return self.get_record(record_id)

    def unmark_irrelevant(self, record_id: int, actor: str) -> dict:
        with self._lock, self.db:
            row = self._record_row(record_id)
            if row["status"] != "irrelevant":
                raise InvalidTransition(f"record {record_id} is not irrelevant")
            cells = json.loads(row["cells_json"])
            restored = "edited" if any(c.get("edited") for c in cells.values()) else "generated"
            self.db.execute(
                "UPDATE records SET status=?, version=version+1 WHERE record_id=?",
                (restored, record_id),
            )
            self._audit(
                row["project_id"], actor, EVENT_SETTING_IRRELEVANT, record_id,
                before="irrelevant", after=restored,
            )
        return self.get_record(record_id)

    # --- verification surfaces ---

    def record_provenance(self, record_id: int, actor: str | None = None) -> dict:
        record = self.get_record(record_id)
        if actor:
            with self._lock, self.db:
                self._audit(record["project_id"], actor, EVENT_VETTING_VIEWED, record_id)
        return {
            "record_id": record_id,
            "cells": {
                name: cell.get("provenance") for name, cell in record["cells"].items()
            },
        }

    def record_support(
        self, record_id: int, column: str, k: int | None = None, actor: str | None = None
    ) -> dict:
        record = self.get_record(record_id)
        schema = self.project_schema(record["project_id"])
        if column not in schema.column_names:
            raise UnknownColumn(f"column not in schema: {column}")
        doc = self.load_parsed_document(record["project_id"], record["doc_id"])
        value = record["cells"].get(column, {}).get("value", "")
        scored = supporting_paragraphs(
            [value],
            doc,
            top_k=k if k is not None else self.cfg.support_top_k,
            k1=self.cfg.bm25_k1,
            b=self.cfg.bm25_b,
        )
        if actor:
            with self._lock, self.db:
                self._audit(record["project_id"], actor, EVENT_VETTING_VIEWED, record_id, column)
        return {
            "record_id": record_id,
            "column": column,
            "paragraphs": [
                {
                    "index": s.paragraph.index,
                    "score": s.score,
                    "text": s.paragraph.text,
                    "highlighted": s.highlighted,
                }
                for s in scored
            ],
        }

    def explain_cell(self, record_id: int, column: str, actor: str) -> dict:
        record = self.get_record(record_id)
        schema = self.project_schema(record["project_id"])
        doc = self.load_parsed_document(record["project_id"], record["doc_id"])
        value = record["cells"].get(column, {}).get("value", "")
        prompt = build_explanation_prompt(
            column, value, doc.preferred_text(), schema.column_names
        )
        response = self.llm.complete(prompt)
        with self._lock, self.db:
            self._audit(
                record["project_id"], actor, EVENT_EXPLANATION_REQUESTED, record_id, column
            )
        return {"record_id": record_id, "column": column, "explanation": response}

    # --- audit & export ---

    def audit_log(self, project_id: int) -> list[dict]:
        self._project_row(project_id)
        rows = self.db.execute(
            "SELECT * FROM audit_events WHERE project_id=? ORDER BY event_id",
            (project_id,),
        ).fetchall()
        return [dict(r) for r in rows]

    def _export_records(self, project_id: int, include_irrelevant: bool) -> list[sqlite3.Row]:
        query = (
            "SELECT * FROM records WHERE project_id=?"
            + ("" if include_irrelevant else " AND status != 'irrelevant'")
            + " ORDER BY record_id"
        )
        return self.db.execute(query, (project_id,)).fetchall()

    def export(self, project_id: int, fmt: str, include_irrelevant: bool = False) -> bytes:
        """CSV or JSON export; the JSON form is the evaluation dump format."""
        project = self.get_project(project_id)
        if not project["samples"]:
            raise NoBatches(f"project {project_id} has no batches to export")
        schema = self.project_schema(project_id)
        rows = self._export_records(project_id, include_irrelevant)
        if fmt == "csv":
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\r\n")
            writer.writerow(["doc_id", *schema.column_names])
            for row in rows:
                cells = json.loads(row["cells_json"])
                writer.writerow(
                    [row["doc_id"]]
                    + [cells.get(name, {}).get("value", "") for name in schema.column_names]
                )
            return buffer.getvalue().encode("utf-8")
        if fmt == "json":
            batch_doc_ids = []
            for sample in project["samples"]:
                batch = self.db.execute(
                    "SELECT doc_ids_json FROM batches WHERE batch_id=?",
                    (sample["batch_id"],),
                ).fetchone()
                for doc_id in json.loads(batch["doc_ids_json"]):
                    if doc_id not in batch_doc_ids:
                        batch_doc_ids.append(doc_id)
            by_doc: dict[str, list[dict]] = {doc_id: [] for doc_id in batch_doc_ids}
            for row in rows:
                cells = json.loads(row["cells_json"])
                values = {
                    name: cells.get(name, {}).get("value", "")
                    for name in schema.column_names
                }
                by_doc.setdefault(row["doc_id"], []).append(values)
            payload = {
                "schema": list(schema.column_names),
                "documents": [
                    {"doc_id": doc_id, "records": by_doc[doc_id]} for doc_id in by_doc
                ],
            }
            if project["retired_columns"]:
                payload["retired_columns"] = project["retired_columns"]
            return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
        raise InvalidConfig(f"unknown export format: {fmt}")
