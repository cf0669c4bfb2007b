import pytest

from litcurate.ingest.documents import ParsedDocument, ParserKind, segment_paragraphs
from litcurate.records import Schema

TOY_CORPUS = [
    ("d1", "cat sat"),
    ("d2", "dog ran fast"),
    ("d3", "cat dog mat"),
]


def doc_from_text(doc_id: str, text: str, kind: ParserKind = ParserKind.GENERIC_TEXT) -> ParsedDocument:
    doc = ParsedDocument(doc_id=doc_id)
    doc.variants[kind] = text
    doc.paragraphs[kind] = segment_paragraphs(text)
    return doc


@pytest.fixture
def schema_ab() -> Schema:
    return Schema.from_names(["A", "B"])


@pytest.fixture
def schema_tdms() -> Schema:
    return Schema.from_names(["Task", "Dataset", "Metric", "Score"])
