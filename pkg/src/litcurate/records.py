"""Schema, Record, and Cell: the user's target columns and the row data
generated against them."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptySchema, SchemaParseError
from .ingest.documents import ParserKind
from .verify import MatchGrade


@dataclass(frozen=True)
class Column:
    name: str
    example_hint: str = ""


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]
    schema_version: int = 1

    def __post_init__(self):
        if not self.columns:
            raise EmptySchema("schema needs at least one column")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaParseError(f"duplicate column names: {names}")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @staticmethod
    def from_names(names, schema_version: int = 1) -> "Schema":
        return Schema(
            columns=tuple(Column(name=str(n).strip()) for n in names),
            schema_version=schema_version,
        )

    @staticmethod
    def parse(text: str) -> "Schema":
        """Parse a schema file: a JSON column list or a CSV header row."""
        stripped = text.strip()
        if not stripped:
            raise SchemaParseError("schema file is empty")
        if stripped.startswith(("[", "{")):
            try:
                payload = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise SchemaParseError(f"invalid schema JSON: {exc}") from exc
            if isinstance(payload, dict):
                payload = payload.get("columns")
            if not isinstance(payload, list) or not payload:
                raise SchemaParseError("schema JSON must be a non-empty column list")
            columns = []
            for item in payload:
                if isinstance(item, str):
                    columns.append(Column(name=item.strip()))
                elif isinstance(item, dict) and "name" in item:
                    columns.append(
                        Column(
                            name=str(item["name"]).strip(),
                            example_hint=str(item.get("example_hint", "")),
                        )
                    )
                else:
                    raise SchemaParseError(f"bad column entry: {item!r}")
            return Schema(columns=tuple(columns))
        try:
            header = next(csv.reader(io.StringIO(stripped)))
        except (csv.Error, StopIteration) as exc:
            raise SchemaParseError(f"invalid schema CSV: {exc}") from exc
        names = [h.strip() for h in header if h.strip()]
        if not names:
            raise SchemaParseError("schema CSV header row has no columns")
        return Schema.from_names(names)

    def to_json(self) -> list[dict]:
        return [
            {"name": c.name, **({"example_hint": c.example_hint} if c.example_hint else {})}
            for c in self.columns
        ]


class RecordStatus(str, Enum):
    GENERATED = "generated"
    EDITED = "edited"
    LOCKED = "locked"
    IRRELEVANT = "irrelevant"


class RecordOrigin(str, Enum):
    STRUCTURED_TEI = "structured_tei"
    GENERIC_TEXT = "generic_text"
    MERGED = "merged"

    @staticmethod
    def from_parser(kind: ParserKind) -> "RecordOrigin":
        return RecordOrigin(kind.value)


@dataclass
class Cell:
    value: str = ""
    edited: bool = False
    provenance: MatchGrade | None = None


@dataclass
class Record:
    record_id: str
    doc_id: str
    cells: dict[str, Cell] = field(default_factory=dict)
    origin: RecordOrigin = RecordOrigin.GENERIC_TEXT
    status: RecordStatus = RecordStatus.GENERATED
    # alternative values carried by a merged record (the other pipeline's pairing)
    alt_values: dict[str, str] | None = None
    alt_origin: RecordOrigin | None = None
    alt_score: float | None = None

    def values(self) -> dict[str, str]:
        return {name: cell.value for name, cell in self.cells.items()}

    def value(self, column: str) -> str:
        cell = self.cells.get(column)
        return cell.value if cell else ""


def make_record(
    record_id: str,
    doc_id: str,
    values: dict[str, str],
    schema: Schema,
    origin: RecordOrigin,
) -> Record:
    """Build a record whose cells are exactly the schema columns.

    Keys outside the schema are dropped; missing keys become empty cells.
    """
    cells = {
        name: Cell(value=str(values.get(name, "")))
        for name in schema.column_names
    }
    return Record(record_id=record_id, doc_id=doc_id, cells=cells, origin=origin)


def canonical_key(values: dict[str, str], schema: Schema) -> tuple[str, ...]:
    """Exact-duplicate identity: the cell values in schema column order."""
    return tuple(values.get(name, "") for name in schema.column_names)


@dataclass(frozen=True)
class ICLExample:
    """One retrieved demonstration: a source excerpt plus its verified records."""

    source_doc_excerpt: str
    records: tuple[dict[str, str], ...]
    source_doc_id: str = ""
