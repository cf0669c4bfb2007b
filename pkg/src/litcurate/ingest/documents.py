"""Parsed-document domain types and paragraph segmentation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class ParserKind(str, Enum):
    """The two extraction pipelines a document can be parsed with."""

    STRUCTURED_TEI = "structured_tei"
    GENERIC_TEXT = "generic_text"


# When a single variant has to stand in for the document, prefer the
# structured pipeline's text.
VARIANT_PREFERENCE = (ParserKind.STRUCTURED_TEI, ParserKind.GENERIC_TEXT)


@dataclass(frozen=True)
class Paragraph:
    index: int
    text: str
    start: int
    end: int  # half-open end offset into the variant text

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TableBlock:
    markdown: str
    caption: str = ""
    anchor_char_offset: int = 0


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    variant: ParserKind
    start: int
    end: int
    text: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class ParsedDocument:
    """A document's extracted text variants plus table blocks.

    ``variants`` maps each successful parser kind to its full text;
    ``paragraphs`` holds that text segmented with exact char spans.
    Per-variant parse failures are recorded in ``failures`` and are
    non-fatal as long as one variant succeeded.
    """

    doc_id: str
    source_uri: str = ""
    variants: dict[ParserKind, str] = field(default_factory=dict)
    paragraphs: dict[ParserKind, list[Paragraph]] = field(default_factory=dict)
    tables: list[TableBlock] = field(default_factory=list)
    ocr_applied: bool = False
    failures: dict[ParserKind, str] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return not self.variants

    def preferred_kind(self) -> ParserKind | None:
        for kind in VARIANT_PREFERENCE:
            if kind in self.variants:
                return kind
        return None

    def preferred_text(self) -> str:
        kind = self.preferred_kind()
        return self.variants[kind] if kind is not None else ""

    def preferred_paragraphs(self) -> list[Paragraph]:
        kind = self.preferred_kind()
        return self.paragraphs.get(kind, []) if kind is not None else []


# One or more blank lines (possibly with trailing spaces/tabs) end a paragraph.
_PARA_SEP = re.compile(r"(?:\r?\n[ \t]*){2,}")


def segment_paragraphs(text: str) -> list[Paragraph]:
    """Split text into paragraphs on blank lines, keeping exact spans.

    Whitespace-only blocks are dropped; each paragraph's text is literally
    ``text[start:end]``, so spans are non-overlapping and ascending.
    """
    paragraphs: list[Paragraph] = []
    pos = 0
    for match in _PARA_SEP.finditer(text):
        _append_block(paragraphs, text, pos, match.start())
        pos = match.end()
    _append_block(paragraphs, text, pos, len(text))
    return paragraphs


def _append_block(out: list[Paragraph], text: str, start: int, end: int) -> None:
    block = text[start:end]
    stripped = block.strip()
    if not stripped:
        return
    s = start + (len(block) - len(block.lstrip()))
    e = end - (len(block) - len(block.rstrip()))
    out.append(Paragraph(index=len(out), text=text[s:e], start=s, end=e))
