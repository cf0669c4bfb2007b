"""Leave-one-out workflow simulation.

For each document, the remaining documents' gold records stand in for human
corrections: a seeded random pool of size k is drawn, BM25-ranked against
the test document, and the top m entries feed the generator as in-context
examples. The test document never enters its own pool.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import EngineConfig
from .errors import EngineError, InvalidConfig
from .generator import generate_records
from .ingest.documents import ParsedDocument, ParserKind, segment_paragraphs
from .llm import LlmProvider
from .pool import CorrectionPool, PoolEntry
from .records import RecordOrigin, Schema


@dataclass
class SimulationConfig:
    documents: list[tuple[str, str]]  # (doc_id, text)
    gold: dict[str, list[dict[str, str]]]  # doc_id -> gold records
    schema: Schema
    llm: LlmProvider
    pool_size: int = 0  # k
    shots: int = 1  # m
    seed: int = 0
    engine: EngineConfig = field(default_factory=EngineConfig)


@dataclass
class SimulationResult:
    table: dict  # predicted table dump
    trace: list[dict]  # per-doc pool/example bookkeeping


def _doc_rng(seed: int, position: int) -> random.Random:
    return random.Random(seed * 1_000_003 + position)


def _as_parsed(doc_id: str, text: str) -> ParsedDocument:
    doc = ParsedDocument(doc_id=doc_id)
    doc.variants[ParserKind.GENERIC_TEXT] = text
    doc.paragraphs[ParserKind.GENERIC_TEXT] = segment_paragraphs(text)
    return doc


def simulate_hatdc(cfg: SimulationConfig) -> SimulationResult:
    """Run the mimic workflow over the dataset; deterministic for a fixed
    seed and a deterministic provider. Per-document generation errors are
    recorded without aborting the loop."""
    if not cfg.documents:
        raise InvalidConfig("simulation needs at least one document")
    if cfg.pool_size < 0 or cfg.shots < 0:
        raise InvalidConfig("pool size and shots must be non-negative")

    engine = cfg.engine.updated(shots=cfg.shots, seed=cfg.seed)
    columns = list(cfg.schema.column_names)
    documents_out = []
    trace = []
    for position, (doc_id, text) in enumerate(cfg.documents):
        candidates = [(d, t) for d, t in cfg.documents if d != doc_id]
        rng = _doc_rng(cfg.seed, position)
        if cfg.pool_size >= len(candidates):
            sampled = list(candidates)
        else:
            sampled = rng.sample(candidates, cfg.pool_size)
        pool = CorrectionPool(
            entries=tuple(
                PoolEntry(
                    doc_id=d,
                    text=t,
                    records=tuple(dict(r) for r in cfg.gold.get(d, [])),
                )
                for d, t in sampled
            ),
            version=0,
        )

        entry = {
            "doc_id": doc_id,
            "candidate_ids": [d for d, _ in candidates],
            "pool_ids": [d for d, _ in sampled],
            "example_ids": [],
            "error": None,
        }
        records = []
        try:
            result = generate_records(_as_parsed(doc_id, text), cfg.schema, pool, cfg.llm, engine)
            records = result.get(RecordOrigin.GENERIC_TEXT)
            entry["example_ids"] = [e.source_doc_id for e in result.examples]
        except EngineError as exc:
            entry["error"] = str(exc)
        trace.append(entry)
        documents_out.append(
            {
                "doc_id": doc_id,
                "records": [
                    {name: record.value(name) for name in columns} for record in records
                ],
            }
        )

    table = {"schema": columns, "documents": documents_out}
    return SimulationResult(table=table, trace=trace)
