"""Document ingestion: routing, parsing, table merging, chunking."""

from .chunking import chunk_text
from .documents import (
    Chunk,
    Paragraph,
    ParsedDocument,
    ParserKind,
    TableBlock,
    segment_paragraphs,
)
from .parsers import (
    GrobidClient,
    TikaClient,
    ingest_path,
    ingest_source,
    parse_variant,
    tei_to_text,
)
from .routing import IngestPlan, TextLayerProbe, probe_source, route_document, run_ocr
from .tables import html_table_to_markdown, merge_tables

__all__ = [
    "Chunk",
    "GrobidClient",
    "IngestPlan",
    "Paragraph",
    "ParsedDocument",
    "ParserKind",
    "TableBlock",
    "TextLayerProbe",
    "TikaClient",
    "chunk_text",
    "html_table_to_markdown",
    "ingest_path",
    "ingest_source",
    "merge_tables",
    "parse_variant",
    "probe_source",
    "route_document",
    "run_ocr",
    "segment_paragraphs",
    "tei_to_text",
]
