"""Parser-service clients and the per-document ingest orchestration.

Two extraction pipelines run per document: a structured scholarly parser
(GROBID-compatible, returns TEI XML) and a generic content extractor
(Tika-compatible, returns plain text). A per-variant failure is non-fatal;
a document is failed only when every variant fails.
"""

from __future__ import annotations

import json
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from ..errors import EmptyExtraction, MalformedTable, ServiceUnavailable, UnreadableSource
from .documents import Paragraph, ParsedDocument, ParserKind, TableBlock, segment_paragraphs
from .routing import probe_source, route_document, run_ocr
from .tables import html_table_to_markdown, merge_tables


class ParserServiceClient(Protocol):
    kind: ParserKind

    def extract(self, raw: bytes, filename: str) -> str:
        """Return the document's plain text; raise ServiceUnavailable on failure."""
        ...


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def tei_to_text(tei_xml: str) -> str:
    """Flatten TEI XML into plain text: one paragraph per <p>/<head>,
    sections separated by blank lines."""
    try:
        root = ET.fromstring(tei_xml)
    except ET.ParseError as exc:
        raise EmptyExtraction(f"TEI response is not parseable XML: {exc}") from exc
    blocks: list[str] = []
    for elem in root.iter():
        if _local_name(elem.tag) in ("head", "p"):
            text = " ".join("".join(elem.itertext()).split())
            if text:
                blocks.append(text)
    return "\n\n".join(blocks)


class GrobidClient:
    """HTTP client for a GROBID-compatible processFulltextDocument endpoint."""

    kind = ParserKind.STRUCTURED_TEI

    def __init__(self, base_url: str, timeout: float = 120.0, transport=None):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def extract(self, raw: bytes, filename: str) -> str:
        url = f"{self.base_url}/api/processFulltextDocument"
        try:
            response = self._client.post(
                url, files={"input": (filename, raw, "application/pdf")}
            )
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"structured parser unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ServiceUnavailable(
                f"structured parser returned HTTP {response.status_code}"
            )
        return tei_to_text(response.text)


class TikaClient:
    """HTTP client for a Tika-compatible plain-text extraction endpoint."""

    kind = ParserKind.GENERIC_TEXT

    def __init__(self, base_url: str, timeout: float = 120.0, transport=None):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def extract(self, raw: bytes, filename: str) -> str:
        url = f"{self.base_url}/tika"
        try:
            response = self._client.put(
                url, content=raw, headers={"Accept": "text/plain"}
            )
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"generic parser unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ServiceUnavailable(f"generic parser returned HTTP {response.status_code}")
        return response.text


def parse_variant(
    raw: bytes, kind: ParserKind, service: ParserServiceClient, filename: str = "document.pdf"
) -> tuple[str, list[Paragraph]]:
    """Extract one variant's text and paragraphs via the given service."""
    if service.kind != kind:
        raise ValueError(f"client is for {service.kind}, asked for {kind}")
    text = service.extract(raw, filename)
    if not text.strip():
        raise EmptyExtraction(f"{kind.value} extraction produced no text")
    return text, segment_paragraphs(text)


def attach_tables(doc: ParsedDocument, blocks: Sequence[TableBlock]) -> None:
    """Merge table markdown into the preferred variant and re-segment it."""
    if not blocks:
        return
    doc.tables = sorted(blocks, key=lambda b: b.anchor_char_offset)
    kind = doc.preferred_kind()
    if kind is None:
        return
    merged = merge_tables(doc.variants[kind], doc.tables)
    doc.variants[kind] = merged
    doc.paragraphs[kind] = segment_paragraphs(merged)


def table_blocks_from_html(entries: Sequence[dict]) -> list[TableBlock]:
    """Build TableBlocks from {html|markdown, caption, anchor} dicts."""
    blocks = []
    for entry in entries:
        if "html" in entry:
            markdown = html_table_to_markdown(entry["html"])
        elif "markdown" in entry:
            markdown = entry["markdown"]
        else:
            raise MalformedTable("table entry needs an 'html' or 'markdown' key")
        blocks.append(
            TableBlock(
                markdown=markdown,
                caption=entry.get("caption", ""),
                anchor_char_offset=int(entry.get("anchor", 0)),
            )
        )
    return blocks


def ingest_source(
    doc_id: str,
    raw: bytes,
    *,
    clients: Sequence[ParserServiceClient],
    source_uri: str = "",
    tables: Sequence[TableBlock] = (),
    ocr_applied: bool = False,
) -> ParsedDocument:
    """Run every parser pipeline over one source; per-variant failures are
    recorded and only a total failure marks the document failed."""
    doc = ParsedDocument(doc_id=doc_id, source_uri=source_uri, ocr_applied=ocr_applied)
    for client in clients:
        try:
            text, paragraphs = parse_variant(raw, client.kind, client)
        except (ServiceUnavailable, EmptyExtraction) as exc:
            doc.failures[client.kind] = str(exc)
            continue
        doc.variants[client.kind] = text
        doc.paragraphs[client.kind] = paragraphs
    attach_tables(doc, tables)
    return doc


def _sidecar_tables(path: Path) -> list[TableBlock]:
    sidecar = path.with_suffix(".tables.json")
    if not sidecar.exists():
        return []
    return table_blocks_from_html(json.loads(sidecar.read_text(encoding="utf-8")))


def ingest_path(
    doc_id: str,
    path: str | Path,
    *,
    clients: Sequence[ParserServiceClient] = (),
    ocr_command: str = "",
) -> ParsedDocument:
    """Ingest a file. PDFs go through probe/OCR routing and the configured
    parser services; .txt and .tei.xml files are handled locally so fixture
    corpora need no network."""
    path = Path(path)
    suffix = path.suffix.lower()
    tables = _sidecar_tables(path)

    if suffix == ".txt":
        text = path.read_text(encoding="utf-8")
        doc = ParsedDocument(doc_id=doc_id, source_uri=str(path))
        if text.strip():
            doc.variants[ParserKind.GENERIC_TEXT] = text
            doc.paragraphs[ParserKind.GENERIC_TEXT] = segment_paragraphs(text)
        else:
            doc.failures[ParserKind.GENERIC_TEXT] = "empty text file"
        attach_tables(doc, tables)
        return doc

    if suffix == ".xml" or path.name.lower().endswith(".tei.xml"):
        doc = ParsedDocument(doc_id=doc_id, source_uri=str(path))
        try:
            text = tei_to_text(path.read_text(encoding="utf-8"))
            if not text.strip():
                raise EmptyExtraction("TEI file contains no text")
            doc.variants[ParserKind.STRUCTURED_TEI] = text
            doc.paragraphs[ParserKind.STRUCTURED_TEI] = segment_paragraphs(text)
        except (EmptyExtraction, OSError) as exc:
            doc.failures[ParserKind.STRUCTURED_TEI] = str(exc)
        attach_tables(doc, tables)
        return doc

    probe = probe_source(path)
    plan = route_document(probe)
    source_path = path
    ocr_applied = False
    if plan.ocr:
        with tempfile.NamedTemporaryFile(suffix=".pdf", delete=False) as handle:
            out_path = Path(handle.name)
        source_path = run_ocr(ocr_command, path, out_path)
        ocr_applied = True
    raw = source_path.read_bytes()
    if not raw:
        raise UnreadableSource(f"empty source: {path}")
    wanted = [c for c in clients if c.kind in plan.parser_kinds]
    return ingest_source(
        doc_id,
        raw,
        clients=wanted,
        source_uri=str(path),
        tables=tables,
        ocr_applied=ocr_applied,
    )
