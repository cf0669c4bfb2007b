"""Record-aligned precision/recall/F1 and ChrF for predicted vs gold tables.

Correctness is counted per cell, but only after the predicted and gold
records of a document are optimally one-to-one aligned by their number of
exactly matching normalized cells. All reported values sit on a 0-100 scale.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .aligner import serialize_record
from .errors import DocIdMismatch, MalformedDump, SchemaMismatch
from .matching import Assignment, hungarian_max
from .records import Schema

CHRF_MAX_N = 6
CHRF_BETA = 2.0


def normalize_cell(value: str, exact_case: bool = False) -> str:
    """NFC-normalize, trim, collapse internal whitespace, casefold."""
    normalized = " ".join(unicodedata.normalize("NFC", value).split())
    return normalized if exact_case else normalized.casefold()


def _matching_cells(
    pred: Mapping[str, str],
    gold: Mapping[str, str],
    schema: Schema,
    exact_case: bool,
) -> int:
    count = 0
    for name in schema.column_names:
        p = normalize_cell(str(pred.get(name, "")), exact_case)
        g = normalize_cell(str(gold.get(name, "")), exact_case)
        if p and g and p == g:
            count += 1
    return count


def _check_schema_keys(records: Sequence[Mapping[str, str]], schema: Schema, side: str) -> None:
    allowed = set(schema.column_names)
    for record in records:
        extras = set(record) - allowed
        if extras:
            raise SchemaMismatch(f"{side} record has columns outside the schema: {sorted(extras)}")


def align_for_eval(
    pred_records: Sequence[Mapping[str, str]],
    gold_records: Sequence[Mapping[str, str]],
    schema: Schema,
    exact_case: bool = False,
) -> Assignment:
    """Optimal record pairing by count of exactly matching normalized cells."""
    _check_schema_keys(pred_records, schema, "predicted")
    _check_schema_keys(gold_records, schema, "gold")
    matrix = [
        [float(_matching_cells(p, g, schema, exact_case)) for g in gold_records]
        for p in pred_records
    ]
    return hungarian_max(matrix)


def _non_empty_cells(records: Sequence[Mapping[str, str]], schema: Schema, exact_case: bool) -> int:
    return sum(
        1
        for record in records
        for name in schema.column_names
        if normalize_cell(str(record.get(name, "")), exact_case)
    )


def record_prf(
    pred_table: Mapping[str, Sequence[Mapping[str, str]]],
    gold_table: Mapping[str, Sequence[Mapping[str, str]]],
    schema: Schema,
    exact_case: bool = False,
) -> tuple[float, float, float]:
    """Micro-averaged P/R/F1 (0-100) over documents keyed by doc_id."""
    correct = 0
    pred_cells = 0
    gold_cells = 0
    for doc_id in gold_table.keys() | pred_table.keys():
        preds = list(pred_table.get(doc_id, ()))
        golds = list(gold_table.get(doc_id, ()))
        assignment = align_for_eval(preds, golds, schema, exact_case)
        correct += int(assignment.total)
        pred_cells += _non_empty_cells(preds, schema, exact_case)
        gold_cells += _non_empty_cells(golds, schema, exact_case)
    precision = correct / pred_cells if pred_cells else 0.0
    recall = correct / gold_cells if gold_cells else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return 100.0 * precision, 100.0 * recall, 100.0 * f1


def chrf_statistics(pred_text: str, ref_text: str, max_n: int = CHRF_MAX_N) -> list[tuple[int, int, int]]:
    """(pred_total, ref_total, common) per n-gram order, whitespace removed."""
    pred = "".join(pred_text.split())
    ref = "".join(ref_text.split())
    stats = []
    for n in range(1, max_n + 1):
        pred_grams = Counter(pred[i:i + n] for i in range(len(pred) - n + 1))
        ref_grams = Counter(ref[i:i + n] for i in range(len(ref) - n + 1))
        common = sum((pred_grams & ref_grams).values())
        stats.append((sum(pred_grams.values()), sum(ref_grams.values()), common))
    return stats


def chrf(pred_text: str, ref_text: str, max_n: int = CHRF_MAX_N, beta: float = CHRF_BETA) -> float:
    """Character n-gram F-beta (0-100), averaged over effective orders.

    An order counts only when both sides have at least one n-gram of it.
    """
    precisions = []
    recalls = []
    for pred_total, ref_total, common in chrf_statistics(pred_text, ref_text, max_n):
        if pred_total == 0 or ref_total == 0:
            continue
        precisions.append(common / pred_total)
        recalls.append(common / ref_total)
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    b2 = beta * beta
    return 100.0 * (1 + b2) * p * r / (b2 * p + r)


@dataclass
class DocScores:
    precision: float
    recall: float
    f1: float
    chrf: float


@dataclass
class EvalReport:
    per_doc: dict[str, DocScores] = field(default_factory=dict)
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    chrf: float = 0.0
    doc_count: int = 0
    predicted_records: int = 0
    gold_records: int = 0
    correct_cells: int = 0

    def to_dict(self) -> dict:
        return {
            "aggregates": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "chrf": self.chrf,
            },
            "counts": {
                "docs": self.doc_count,
                "predicted_records": self.predicted_records,
                "gold_records": self.gold_records,
                "correct_cells": self.correct_cells,
            },
            "per_doc": {
                doc_id: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "chrf": s.chrf,
                }
                for doc_id, s in self.per_doc.items()
            },
        }

    def format_row(self, label: str = "dataset") -> str:
        return (
            f"{label}: P={self.precision:.2f} R={self.recall:.2f} "
            f"F1={self.f1:.2f} ChrF={self.chrf:.2f} "
            f"(docs={self.doc_count}, pred={self.predicted_records}, gold={self.gold_records})"
        )


def load_dump(path: str | Path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedDump(f"cannot read table dump {path}: {exc}") from exc
    validate_dump(payload)
    return payload


def validate_dump(payload) -> None:
    if not isinstance(payload, dict):
        raise MalformedDump("table dump must be a JSON object")
    if not isinstance(payload.get("schema"), list) or not payload["schema"]:
        raise MalformedDump("table dump needs a non-empty 'schema' column list")
    documents = payload.get("documents")
    if not isinstance(documents, list):
        raise MalformedDump("table dump needs a 'documents' list")
    for doc in documents:
        if not isinstance(doc, dict) or "doc_id" not in doc:
            raise MalformedDump("every dump document needs a doc_id")
        if not isinstance(doc.get("records"), list):
            raise MalformedDump(f"document {doc.get('doc_id')!r} needs a 'records' list")
        for record in doc["records"]:
            if not isinstance(record, dict):
                raise MalformedDump(f"document {doc['doc_id']!r} has a non-object record")


def _dump_table(payload: dict) -> dict[str, list[dict]]:
    table: dict[str, list[dict]] = {}
    for doc in payload["documents"]:
        doc_id = str(doc["doc_id"])
        if doc_id in table:
            raise MalformedDump(f"duplicate doc_id in dump: {doc_id}")
        table[doc_id] = [
            {str(k): str(v) for k, v in record.items()} for record in doc["records"]
        ]
    return table


def evaluate_dataset(
    pred_dump: dict,
    gold_dump: dict,
    schema: Schema | None = None,
    exact_case: bool = False,
) -> EvalReport:
    """Score a predicted table dump against a gold dump.

    Gold documents missing from the predictions count as full misses;
    predicted doc_ids unknown to the gold dump are an error.
    """
    validate_dump(pred_dump)
    validate_dump(gold_dump)
    if schema is None:
        schema = Schema.from_names(gold_dump["schema"])
    if list(pred_dump["schema"]) != list(gold_dump["schema"]):
        raise SchemaMismatch(
            f"dump schemas differ: {pred_dump['schema']} vs {gold_dump['schema']}"
        )
    pred_table = _dump_table(pred_dump)
    gold_table = _dump_table(gold_dump)
    unknown = sorted(set(pred_table) - set(gold_table))
    if unknown:
        raise DocIdMismatch(f"predicted doc_ids missing from gold: {unknown}", offenders=unknown)

    report = EvalReport()
    total_correct = 0
    total_pred_cells = 0
    total_gold_cells = 0
    chrf_values = []
    for doc_id in gold_table:
        preds = pred_table.get(doc_id, [])
        golds = gold_table[doc_id]
        assignment = align_for_eval(preds, golds, schema, exact_case)
        correct = int(assignment.total)
        pred_cells = _non_empty_cells(preds, schema, exact_case)
        gold_cells = _non_empty_cells(golds, schema, exact_case)
        p = correct / pred_cells if pred_cells else 0.0
        r = correct / gold_cells if gold_cells else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        pair_scores = [
            chrf(
                serialize_record(preds[row], schema),
                serialize_record(golds[col], schema),
            )
            for row, col, _ in assignment.pairs
        ]
        doc_chrf = sum(pair_scores) / len(pair_scores) if pair_scores else 0.0
        report.per_doc[doc_id] = DocScores(100.0 * p, 100.0 * r, 100.0 * f1, doc_chrf)
        chrf_values.append(doc_chrf)
        total_correct += correct
        total_pred_cells += pred_cells
        total_gold_cells += gold_cells
        report.predicted_records += len(preds)
        report.gold_records += len(golds)

    precision = total_correct / total_pred_cells if total_pred_cells else 0.0
    recall = total_correct / total_gold_cells if total_gold_cells else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    report.precision = 100.0 * precision
    report.recall = 100.0 * recall
    report.f1 = 100.0 * f1
    report.chrf = sum(chrf_values) / len(chrf_values) if chrf_values else 0.0
    report.doc_count = len(gold_table)
    report.correct_cells = total_correct
    return report
