"""HTTP+JSON API over the store; this is the surface the UI consumes."""

from __future__ import annotations

import json
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import EngineConfig
from .errors import (
    AlreadyLocked,
    DocIdMismatch,
    DocsNotIngested,
    DuplicateName,
    EngineError,
    InvalidConfig,
    MalformedDump,
    NoBatches,
    NotFound,
    PilotCapExceeded,
    RecordLocked,
    SchemaParseError,
    UnknownAttribute,
    UnknownColumn,
)
from .store import InvalidTransition, Store

_STATUS_CODES: list[tuple[type[EngineError], int]] = [
    (NotFound, 404),
    (DuplicateName, 409),
    (AlreadyLocked, 409),
    (RecordLocked, 409),
    (InvalidTransition, 409),
    (PilotCapExceeded, 400),
    (DocsNotIngested, 400),
    (SchemaParseError, 400),
    (UnknownColumn, 400),
    (UnknownAttribute, 400),
    (NoBatches, 400),
    (MalformedDump, 400),
    (DocIdMismatch, 400),
    (InvalidConfig, 400),
]


def _status_for(exc: EngineError) -> int:
    for exc_type, status in _STATUS_CODES:
        if isinstance(exc, exc_type):
            return status
    return 500


class ProjectBody(BaseModel):
    name: str
    schema_text: str | list | None = Field(default=None, alias="schema")
    document_uris: list[str] = []

    model_config = {"populate_by_name": True}


class DocumentBody(BaseModel):
    doc_id: str
    text: str | None = None
    tei_xml: str | None = None
    path: str | None = None
    tables: list[dict] = []


class BatchBody(BaseModel):
    phase: str
    doc_ids: list[str]


class CellBody(BaseModel):
    value: str
    actor: str = "curator"


class ActorBody(BaseModel):
    actor: str = "curator"


class ExplainBody(BaseModel):
    column: str
    actor: str = "curator"


class SchemaBody(BaseModel):
    schema_text: str | list = Field(alias="schema")

    model_config = {"populate_by_name": True}


def _schema_as_text(schema: str | list | None) -> str:
    if schema is None:
        raise SchemaParseError("a schema is required")
    if isinstance(schema, str):
        return schema
    return json.dumps(schema)


def create_app(store: Store, cfg: EngineConfig | None = None) -> FastAPI:
    cfg = cfg or store.cfg
    app = FastAPI(title="litcurate", version="0.1.0")

    def check_auth(authorization: str | None = Header(default=None)) -> None:
        token = cfg.api_token
        if not token:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    auth = Depends(check_auth)

    @app.exception_handler(EngineError)
    async def engine_error_handler(_request: Request, exc: EngineError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc), content=exc.to_dict())

    @app.post("/projects", dependencies=[auth])
    def create_project(body: ProjectBody) -> dict:
        return store.create_project(
            body.name, _schema_as_text(body.schema_text), body.document_uris
        )

    @app.get("/projects/{project_id}", dependencies=[auth])
    def get_project(project_id: int) -> dict:
        return store.get_project(project_id)

    @app.put("/projects/{project_id}/schema", dependencies=[auth])
    def update_schema(project_id: int, body: SchemaBody) -> dict:
        return store.update_schema(project_id, _schema_as_text(body.schema_text))

    @app.post("/projects/{project_id}/documents", dependencies=[auth])
    def add_document(project_id: int, body: DocumentBody) -> dict:
        return store.add_document(
            project_id,
            body.doc_id,
            text=body.text,
            tei_xml=body.tei_xml,
            path=body.path,
            tables=body.tables,
        )

    @app.post("/projects/{project_id}/batches", dependencies=[auth])
    def run_batch(project_id: int, body: BatchBody) -> dict:
        return store.run_batch(project_id, body.doc_ids, body.phase)

    @app.get("/batches/{batch_id}", dependencies=[auth])
    def get_batch(batch_id: int) -> dict:
        return store.get_batch(batch_id)

    @app.get("/records/{record_id}", dependencies=[auth])
    def get_record(record_id: int) -> dict:
        return store.get_record(record_id)

    @app.patch("/records/{record_id}/cells/{column}", dependencies=[auth])
    def edit_cell(record_id: int, column: str, body: CellBody) -> dict:
        return store.apply_edit(record_id, column, body.value, body.actor)

    @app.post("/records/{record_id}/lock", dependencies=[auth])
    def lock_record(record_id: int, body: ActorBody | None = None) -> dict:
        actor = body.actor if body else "curator"
        return store.lock_record(record_id, actor)

    @app.post("/records/{record_id}/unlock", dependencies=[auth])
    def unlock_record(record_id: int, body: ActorBody | None = None) -> dict:
        actor = body.actor if body else "curator"
        return store.unlock_record(record_id, actor)

    @app.post("/records/{record_id}/irrelevant", dependencies=[auth])
    def mark_irrelevant(record_id: int, body: ActorBody | None = None) -> dict:
        actor = body.actor if body else "curator"
        return store.mark_irrelevant(record_id, actor)

    @app.delete("/records/{record_id}/irrelevant", dependencies=[auth])
    def unmark_irrelevant(record_id: int, body: ActorBody | None = None) -> dict:
        actor = body.actor if body else "curator"
        return store.unmark_irrelevant(record_id, actor)

    @app.get("/records/{record_id}/provenance", dependencies=[auth])
    def record_provenance(record_id: int, actor: str | None = None) -> dict:
        return store.record_provenance(record_id, actor)

    @app.get("/records/{record_id}/support", dependencies=[auth])
    def record_support(
        record_id: int,
        column: str = Query(...),
        k: int = Query(default=3, ge=1, le=50),
        actor: str | None = None,
    ) -> dict:
        return store.record_support(record_id, column, k, actor)

    @app.post("/records/{record_id}/explain", dependencies=[auth])
    def explain(record_id: int, body: ExplainBody) -> dict:
        return store.explain_cell(record_id, body.column, body.actor)

    @app.get("/projects/{project_id}/export", dependencies=[auth])
    def export(
        project_id: int,
        format: str = Query(default="json", pattern="^(csv|json)$"),
        include_irrelevant: bool = False,
    ) -> Response:
        payload = store.export(project_id, format, include_irrelevant)
        media = "text/csv" if format == "csv" else "application/json"
        return Response(content=payload, media_type=media)

    @app.get("/projects/{project_id}/audit", dependencies=[auth])
    def audit(project_id: int) -> dict[str, Any]:
        return {"events": store.audit_log(project_id)}

    return app
