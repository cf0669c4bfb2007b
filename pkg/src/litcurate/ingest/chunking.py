"""Sliding-window chunking by characters."""

from __future__ import annotations

import math

from ..errors import InvalidConfig
from .documents import Chunk, ParserKind

DEFAULT_OVERLAP = 0.10


def chunk_text(
    text: str,
    window_chars: int,
    overlap_fraction: float = DEFAULT_OVERLAP,
    *,
    doc_id: str = "",
    variant: ParserKind = ParserKind.GENERIC_TEXT,
) -> list[Chunk]:
    """Cut text into overlapping fixed-width windows.

    Chunks start at 0, stride, 2*stride, ... with
    stride = window - floor(window * overlap); the final chunk is clamped to
    the end of the text. Text no longer than the window yields one chunk.
    """
    if window_chars < 1:
        raise InvalidConfig(f"window_chars must be >= 1, got {window_chars}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidConfig(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    stride = window_chars - math.floor(window_chars * overlap_fraction)
    if stride <= 0:
        raise InvalidConfig("overlap leaves a zero stride")

    chunks: list[Chunk] = []
    start = 0
    length = len(text)
    while True:
        end = start + window_chars
        if end >= length:
            chunks.append(Chunk(doc_id, variant, start, length, text[start:length]))
            break
        chunks.append(Chunk(doc_id, variant, start, end, text[start:end]))
        start += stride
    return chunks
