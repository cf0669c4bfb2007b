"""The correction pool: human-verified records reused as ICL examples."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .bm25 import DEFAULT_B, DEFAULT_K1, build_index, rank, tokenize
from .records import ICLExample

DEFAULT_SHOTS = 1  # one retrieved demonstration per prompt
DEFAULT_EXCERPT_CHARS = 1200


@dataclass(frozen=True)
class PoolEntry:
    doc_id: str
    text: str
    records: tuple[dict[str, str], ...]


@dataclass
class CorrectionPool:
    entries: tuple[PoolEntry, ...] = ()
    version: int = 0

    def snapshot(self) -> "CorrectionPool":
        """Immutable copy handed to batch workers; later growth is invisible."""
        frozen = tuple(
            replace(e, records=tuple(dict(r) for r in e.records)) for e in self.entries
        )
        return CorrectionPool(entries=frozen, version=self.version)

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(e.doc_id for e in self.entries)


def select_icl_examples(
    target_text: str,
    pool: CorrectionPool,
    m: int = DEFAULT_SHOTS,
    *,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    excerpt_chars: int = DEFAULT_EXCERPT_CHARS,
) -> list[ICLExample]:
    """BM25-rank the pool against the target document; return the top m.

    An empty pool (or m=0) yields no examples, which puts the caller in
    zero-shot mode. Ties break by ascending doc_id.
    """
    if m <= 0 or not pool.entries:
        return []
    by_id = {e.doc_id: e for e in pool.entries}
    index = build_index([(e.doc_id, e.text) for e in pool.entries], k1=k1, b=b)
    ranked = rank(index, tokenize(target_text))
    examples = []
    for doc_id, _score in ranked[:m]:
        entry = by_id[doc_id]
        examples.append(
            ICLExample(
                source_doc_excerpt=entry.text[:excerpt_chars],
                records=tuple(dict(r) for r in entry.records),
                source_doc_id=doc_id,
            )
        )
    return examples
