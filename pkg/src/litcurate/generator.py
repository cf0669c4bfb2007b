"""Prompt construction, LLM-output parsing, and per-document record generation.

The prompt puts the schema into a bracketed key-mapping block with
"(example: ...)" hints, optionally stacks retrieved demonstration blocks,
and fences the article text. The model must answer with a list of JSON
dictionaries; parsing tolerates surrounding prose and code fences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .config import EngineConfig
from .errors import (
    EmptySchema,
    GenerationFailed,
    OutputUnparseable,
    PromptTooLarge,
    ServiceUnavailable,
)
from .ingest.chunking import chunk_text
from .ingest.documents import ParsedDocument, ParserKind
from .llm import LlmProvider
from .pool import CorrectionPool, select_icl_examples
from .records import (
    ICLExample,
    Record,
    RecordOrigin,
    Schema,
    canonical_key,
    make_record,
)

# Fraction of the provider's context reserved for instructions and examples.
PROMPT_OVERHEAD_FRACTION = 0.20

RETRY_REMINDER = "Respond with JSON only."

_ARTICLE_START = "[Given Article Start]"
_ARTICLE_END = "[Given Article End]"
_EXAMPLE_START = "[Demonstration Example Start]"
_EXAMPLE_END = "[Demonstration Example End]"


def build_prompt(schema: Schema, article_text: str, examples: tuple[ICLExample, ...] = ()) -> str:
    """Render the extraction prompt for one article chunk.

    The "(example: ...)" hints come from the top demonstration's first
    record when examples are present, else from the schema's own hints.
    """
    if not schema.columns:
        raise EmptySchema("cannot build a prompt for an empty schema")
    names = schema.column_names
    if examples and examples[0].records:
        first = examples[0].records[0]
        hints = {name: str(first.get(name, "")) for name in names}
    else:
        hints = {c.name: c.example_hint for c in schema.columns}

    lines = [
        f"Please, extract {', '.join(names)} from the given article.",
        "",
        "For the extracted information, you MUST respond in a list of JSON "
        "dictionaries structure with the given Dictionary Key Mapping.",
        "",
        "[Dictionary Key Mapping in your response]",
        "{",
    ]
    for i, name in enumerate(names):
        comma = "," if i < len(names) - 1 else ""
        lines.append(f"{name}: (example: {hints.get(name, '')}){comma}")
    lines.append("}")

    for example in examples:
        rendered = [
            {name: str(rec.get(name, "")) for name in names} for rec in example.records
        ]
        lines += [
            "",
            _EXAMPLE_START,
            "Article excerpt:",
            example.source_doc_excerpt,
            "Records:",
            json.dumps(rendered, ensure_ascii=False),
            _EXAMPLE_END,
        ]

    lines += ["", _ARTICLE_START, article_text, _ARTICLE_END]
    return "\n".join(lines)


def _stringify(value) -> str:
    """Canonical string form for scalar JSON values in cells."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return json.dumps(value, ensure_ascii=False)


def extract_json_records(raw: str) -> list[dict]:
    """Pull the first JSON array of objects out of free-form model output."""
    decoder = json.JSONDecoder()
    idx = raw.find("[")
    while idx != -1:
        try:
            value, _end = decoder.raw_decode(raw, idx)
        except json.JSONDecodeError:
            value = None
        if isinstance(value, list) and all(isinstance(item, dict) for item in value):
            return value
        idx = raw.find("[", idx + 1)
    raise OutputUnparseable("no JSON array of objects in model output", raw=raw)


def parse_llm_output(
    raw: str,
    schema: Schema,
    *,
    doc_id: str = "",
    origin: RecordOrigin = RecordOrigin.GENERIC_TEXT,
) -> list[Record]:
    """Parse model output into records.

    Missing keys become empty cells, keys outside the schema are dropped,
    and non-string scalars are stringified canonically. The raw text rides
    along in OutputUnparseable for the audit log.
    """
    objects = extract_json_records(raw)
    records = []
    for i, obj in enumerate(objects):
        values = {str(k): _stringify(v) for k, v in obj.items()}
        records.append(make_record(f"{doc_id or 'out'}:{origin.value}:{i}", doc_id, values, schema, origin))
    return records


@dataclass
class DualRecordSets:
    """Per-variant record sets for one document, plus per-variant failures."""

    sets: dict[RecordOrigin, list[Record]] = field(default_factory=dict)
    failures: dict[RecordOrigin, str] = field(default_factory=dict)
    examples: tuple[ICLExample, ...] = ()

    def get(self, origin: RecordOrigin) -> list[Record]:
        return self.sets.get(origin, [])


def _complete_with_retry(llm: LlmProvider, prompt: str) -> list[dict]:
    if len(prompt) > llm.context_chars:
        raise PromptTooLarge(
            f"prompt is {len(prompt)} chars, context is {llm.context_chars}"
        )
    raw = llm.complete(prompt)
    try:
        return extract_json_records(raw)
    except OutputUnparseable:
        retry_prompt = prompt + "\n" + RETRY_REMINDER
        if len(retry_prompt) > llm.context_chars:
            raise
        return extract_json_records(llm.complete(retry_prompt))


def generate_records(
    doc: ParsedDocument,
    schema: Schema,
    pool: CorrectionPool,
    llm: LlmProvider,
    cfg: EngineConfig | None = None,
) -> DualRecordSets:
    """Generate one record set per available variant.

    Each variant's text is chunked to the provider's context budget, every
    chunk is prompted with the same retrieved examples, chunk outputs are
    concatenated in order, and exact duplicates are dropped.
    """
    cfg = cfg or EngineConfig()
    if doc.failed:
        raise GenerationFailed(f"document {doc.doc_id} has no parsed variant")

    window = cfg.window or max(1, math.floor(llm.context_chars * (1 - PROMPT_OVERHEAD_FRACTION)))
    examples = tuple(
        select_icl_examples(
            doc.preferred_text(),
            pool,
            cfg.shots,
            k1=cfg.bm25_k1,
            b=cfg.bm25_b,
            excerpt_chars=cfg.icl_excerpt_chars,
        )
    )

    result = DualRecordSets(examples=examples)
    for kind in (ParserKind.STRUCTURED_TEI, ParserKind.GENERIC_TEXT):
        if kind not in doc.variants:
            continue
        origin = RecordOrigin.from_parser(kind)
        try:
            records = _generate_variant(doc, kind, origin, schema, examples, llm, window, cfg)
        except (ServiceUnavailable, OutputUnparseable, PromptTooLarge) as exc:
            result.failures[origin] = str(exc)
            continue
        result.sets[origin] = records
    if not result.sets:
        raise GenerationFailed(
            f"all variants failed for document {doc.doc_id}: {result.failures}"
        )
    return result


def _generate_variant(
    doc: ParsedDocument,
    kind: ParserKind,
    origin: RecordOrigin,
    schema: Schema,
    examples: tuple[ICLExample, ...],
    llm: LlmProvider,
    window: int,
    cfg: EngineConfig,
) -> list[Record]:
    text = doc.variants[kind]
    chunks = chunk_text(text, window, cfg.overlap, doc_id=doc.doc_id, variant=kind)
    merged_values: list[dict[str, str]] = []
    for chunk in chunks:
        prompt = build_prompt(schema, chunk.text, examples)
        for obj in _complete_with_retry(llm, prompt):
            merged_values.append({str(k): _stringify(v) for k, v in obj.items()})

    records = []
    seen = set()
    for values in merged_values:
        key = canonical_key(values, schema)
        if key in seen:
            continue
        seen.add(key)
        records.append(
            make_record(
                f"{doc.doc_id}:{origin.value}:{len(records)}",
                doc.doc_id,
                values,
                schema,
                origin,
            )
        )
    return records
