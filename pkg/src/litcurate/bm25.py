"""Okapi BM25 over an in-memory inverted index.

IDF uses the non-negative formulation ln((N - df + 0.5)/(df + 0.5) + 1).
Defaults k1=1.2, b=0.75; both are exposed through the engine config.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus, UnknownDoc

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumerics; no stemming."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class Bm25Index:
    """Immutable index: document frequencies, lengths, and postings."""

    doc_ids: tuple[str, ...]
    doc_lengths: dict[str, int]
    avgdl: float
    df: dict[str, int]
    postings: dict[str, dict[str, int]] = field(repr=False)  # term -> doc -> tf
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)


def build_index(
    corpus: list[tuple[str, str]],
    tokenizer=tokenize,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> Bm25Index:
    """Index a corpus of (doc_id, text) pairs."""
    if not corpus:
        raise EmptyCorpus("cannot build an index over an empty corpus")
    doc_ids = []
    doc_lengths = {}
    postings: dict[str, dict[str, int]] = {}
    for doc_id, text in corpus:
        if doc_id in doc_lengths:
            raise ValueError(f"duplicate doc_id in corpus: {doc_id}")
        tokens = tokenizer(text)
        doc_ids.append(doc_id)
        doc_lengths[doc_id] = len(tokens)
        for term, tf in Counter(tokens).items():
            postings.setdefault(term, {})[doc_id] = tf
    avgdl = sum(doc_lengths.values()) / len(doc_ids)
    df = {term: len(docs) for term, docs in postings.items()}
    return Bm25Index(
        doc_ids=tuple(doc_ids),
        doc_lengths=doc_lengths,
        avgdl=avgdl,
        df=df,
        postings=postings,
        k1=k1,
        b=b,
    )


def idf(index: Bm25Index, term: str) -> float:
    n = index.doc_count
    d = index.df.get(term, 0)
    return math.log((n - d + 0.5) / (d + 0.5) + 1.0)


def bm25_score(index: Bm25Index, query_tokens: list[str], doc_id: str) -> float:
    """Score one document against a token list.

    Each query-token occurrence contributes independently; tokens absent
    from the document contribute 0.
    """
    if doc_id not in index.doc_lengths:
        raise UnknownDoc(f"doc_id not in index: {doc_id}")
    dl = index.doc_lengths[doc_id]
    if index.avgdl == 0:
        return 0.0
    norm = index.k1 * (1 - index.b + index.b * dl / index.avgdl)
    score = 0.0
    for term in query_tokens:
        tf = index.postings.get(term, {}).get(doc_id, 0)
        if tf == 0:
            continue
        score += idf(index, term) * (tf * (index.k1 + 1)) / (tf + norm)
    return score


def rank(index: Bm25Index, query_tokens: list[str]) -> list[tuple[str, float]]:
    """All docs scored, best first; ties broken by ascending doc_id."""
    scored = [(doc_id, bm25_score(index, query_tokens, doc_id)) for doc_id in index.doc_ids]
    return sorted(scored, key=lambda item: (-item[1], item[0]))
