"""Exception types shared across the engine.

Every error carries a stable ``code`` so the CLI and HTTP layer can emit
machine-readable payloads without string-matching messages.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "engine_error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    def to_dict(self) -> dict:
        payload = {"error": self.code, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


# --- ingest ---

class UnreadableSource(EngineError):
    code = "unreadable_source"


class ServiceUnavailable(EngineError):
    code = "service_unavailable"


class EmptyExtraction(EngineError):
    code = "empty_extraction"


class MalformedTable(EngineError):
    code = "malformed_table"


class InvalidConfig(EngineError):
    code = "invalid_config"


# --- sampling / retrieval ---

class EmptyCorpus(EngineError):
    code = "empty_corpus"


class UnknownDoc(EngineError):
    code = "unknown_doc"


# --- generation ---

class EmptySchema(EngineError):
    code = "empty_schema"


class OutputUnparseable(EngineError):
    code = "output_unparseable"

    def __init__(self, message: str = "", raw: str = "", **details):
        super().__init__(message, **details)
        self.raw = raw


class GenerationFailed(EngineError):
    code = "generation_failed"


class PromptTooLarge(EngineError):
    code = "prompt_too_large"


# --- verification ---

class UnknownAttribute(EngineError):
    code = "unknown_attribute"


# --- evaluation ---

class SchemaMismatch(EngineError):
    code = "schema_mismatch"


class MalformedDump(EngineError):
    code = "malformed_dump"


class DocIdMismatch(EngineError):
    code = "doc_id_mismatch"


# --- store / service ---

class SchemaParseError(EngineError):
    code = "schema_parse_error"


class DuplicateName(EngineError):
    code = "duplicate_name"


class DocsNotIngested(EngineError):
    code = "docs_not_ingested"


class PilotCapExceeded(EngineError):
    code = "pilot_cap_exceeded"


class RecordLocked(EngineError):
    code = "record_locked"


class UnknownColumn(EngineError):
    code = "unknown_column"


class AlreadyLocked(EngineError):
    code = "already_locked"


class NoBatches(EngineError):
    code = "no_batches"


class NotFound(EngineError):
    code = "not_found"
