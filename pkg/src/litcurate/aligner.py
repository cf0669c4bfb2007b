"""Cross-pipeline record alignment: embeddings, cosine similarity, and
Hungarian matching into merged record suggestions."""

from __future__ import annotations

import logging
import math
from typing import Mapping, Protocol, Sequence

import httpx

from .bm25 import tokenize
from .config import EngineConfig
from .errors import InvalidConfig, ServiceUnavailable
from .matching import Assignment, hungarian_max  # re-exported for callers
from .records import Record, RecordOrigin, Schema

logger = logging.getLogger(__name__)

DEFAULT_SUGGEST_THRESHOLD = 0.5

__all__ = [
    "Assignment",
    "EmbeddingProvider",
    "HttpEmbeddingClient",
    "LexicalHashEmbedding",
    "align_record_sets",
    "build_similarity_matrix",
    "cosine",
    "hungarian_max",
    "serialize_record",
]


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> list[float]:
        """Deterministic, all-finite vector of length dim."""
        ...


class LexicalHashEmbedding:
    """Offline fallback: hashed term-frequency vectors.

    Multiplicative string hashing into a fixed number of buckets keeps the
    provider deterministic across platforms with zero dependencies.
    """

    def __init__(self, dim: int = 512):
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for token in tokenize(text):
            h = 0
            for ch in token:
                h = (h * 31 + ord(ch)) & 0xFFFFFFFF
            vec[h % self.dim] += 1.0
        return vec


class HttpEmbeddingClient:
    """Remote embedding service: JSON array of strings in, float arrays out."""

    def __init__(self, base_url: str, dim: int, timeout: float = 60.0, transport=None):
        self.base_url = base_url
        self.dim = dim
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def embed(self, text: str) -> list[float]:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        try:
            response = self._client.post(self.base_url, json=texts)
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"embedding service unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ServiceUnavailable(
                f"embedding service returned HTTP {response.status_code}"
            )
        vectors = response.json()
        for vec in vectors:
            if len(vec) != self.dim:
                raise ServiceUnavailable(
                    f"embedding service returned dim {len(vec)}, expected {self.dim}"
                )
        return vectors


def make_embedding_provider(cfg: EngineConfig, transport=None) -> EmbeddingProvider:
    if cfg.embedding_provider == "lexical":
        return LexicalHashEmbedding(dim=cfg.embedding_dim)
    if cfg.embedding_provider == "http":
        return HttpEmbeddingClient(cfg.embedding_url, cfg.embedding_dim, transport=transport)
    raise InvalidConfig(f"unknown embedding_provider: {cfg.embedding_provider}")


def serialize_record(record: Record | Mapping[str, str], schema: Schema) -> str:
    """Deterministic "col: value; ..." string in schema order, empties omitted."""
    values = record.values() if isinstance(record, Record) else record
    parts = []
    for name in schema.column_names:
        value = values.get(name, "")
        if value:
            parts.append(f"{name}: {value}")
    return "; ".join(parts)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity; a zero vector yields 0 (logged), not an error."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    denom = math.sqrt(nu) * math.sqrt(nv)
    if denom == 0.0:
        # zero (or fully underflowed) vector: similarity defined as 0
        logger.warning("cosine over a zero-norm vector; similarity defined as 0")
        return 0.0
    return dot / denom


def build_similarity_matrix(
    set_a: Sequence[Record],
    set_b: Sequence[Record],
    schema: Schema,
    provider: EmbeddingProvider,
) -> list[list[float]]:
    """Pairwise cosine over embedded record serializations (rows = set A)."""
    vecs_a = [provider.embed(serialize_record(r, schema)) for r in set_a]
    vecs_b = [provider.embed(serialize_record(r, schema)) for r in set_b]
    return [[cosine(va, vb) for vb in vecs_b] for va in vecs_a]


def _merge_pair(primary: Record, other: Record, score: float) -> Record:
    merged = Record(
        record_id=primary.record_id,
        doc_id=primary.doc_id,
        cells=primary.cells,
        origin=RecordOrigin.MERGED,
        status=primary.status,
        alt_values=other.values(),
        alt_origin=other.origin,
        alt_score=score,
    )
    return merged


def align_record_sets(
    set_a: Sequence[Record],
    set_b: Sequence[Record],
    schema: Schema,
    provider: EmbeddingProvider,
    suggest_threshold: float = DEFAULT_SUGGEST_THRESHOLD,
) -> list[Record]:
    """Merge two per-variant record sets into suggestions.

    Hungarian pairs scoring at/above the threshold become one merged record
    (primary side = structured-parser origin) carrying the alternative and
    its similarity; everything else passes through as singletons. No record
    is lost or duplicated.
    """
    set_a = list(set_a)
    set_b = list(set_b)
    if not set_a:
        return set_b
    if not set_b:
        return set_a
    matrix = build_similarity_matrix(set_a, set_b, schema, provider)
    assignment = hungarian_max(matrix)

    merged_by_row: dict[int, tuple[int, float]] = {}
    merged_cols = set()
    for row, col, score in assignment.pairs:
        if score >= suggest_threshold:
            merged_by_row[row] = (col, score)
            merged_cols.add(col)

    out: list[Record] = []
    for row, record in enumerate(set_a):
        if row in merged_by_row:
            col, score = merged_by_row[row]
            other = set_b[col]
            if record.origin == RecordOrigin.STRUCTURED_TEI or other.origin != RecordOrigin.STRUCTURED_TEI:
                primary, alt = record, other
            else:
                primary, alt = other, record
            out.append(_merge_pair(primary, alt, score))
        else:
            out.append(record)
    for col, record in enumerate(set_b):
        if col not in merged_cols:
            out.append(record)
    return out
