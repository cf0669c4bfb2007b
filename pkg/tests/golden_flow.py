"""The scripted end-to-end curation flow used for the golden-file check.

Both the golden-file generator and the acceptance test run exactly this
sequence, so the byte-for-byte comparison pins the whole pipeline's
determinism: ingest -> pilot -> human corrections -> second batch -> export.
"""

from __future__ import annotations

from pathlib import Path

from litcurate.config import EngineConfig
from litcurate.llm import MockLlmProvider
from litcurate.store import Store

GOLDEN_DIR = Path(__file__).parent / "golden"
DOC_ORDER = [
    "alloy-study",
    "ceramic-review",
    "polymer-report",
    "catalyst-note",
    "membrane-paper",
]
PILOT_DOCS = DOC_ORDER[:3]
SECOND_BATCH_DOCS = DOC_ORDER[3:]
SCHEMA_CSV = "Material,Property,Value"


def run_golden_flow(db_path: Path) -> dict:
    """Run the scripted session; returns exports and bookkeeping."""
    cfg = EngineConfig(db_path=str(db_path), seed=0)
    llm = MockLlmProvider(GOLDEN_DIR / "llm_fixture.json")
    store = Store(db_path, cfg, llm=llm)
    try:
        project = store.create_project("golden-demo", SCHEMA_CSV)
        project_id = project["project_id"]
        for doc_id in DOC_ORDER:
            store.add_document(project_id, doc_id, path=str(GOLDEN_DIR / "docs" / f"{doc_id}.txt"))

        pilot = store.run_batch(project_id, PILOT_DOCS, "pilot")
        records = {r["doc_id"]: r for r in pilot["records"]}
        alloy_first = min(
            (r for r in pilot["records"] if r["doc_id"] == "alloy-study"),
            key=lambda r: r["record_id"],
        )

        # three scripted corrections, then verification locks
        edits = [
            (alloy_first["record_id"], "Property", "yield strength (tensile)"),
            (records["ceramic-review"]["record_id"], "Material", "3Y-TZP zirconia"),
            (records["polymer-report"]["record_id"], "Value", "3.4 GPa"),
        ]
        for record_id, column, value in edits:
            store.apply_edit(record_id, column, value, "curator")
        for record_id, _, _ in edits:
            store.lock_record(record_id, "curator")

        second = store.run_batch(project_id, SECOND_BATCH_DOCS, "batch")

        return {
            "project_id": project_id,
            "pilot": pilot,
            "second": second,
            "pool_version": store.load_pool(project_id).version,
            "csv": store.export(project_id, "csv"),
            "json": store.export(project_id, "json"),
            "audit": store.audit_log(project_id),
            "llm": llm,
        }
    finally:
        store.close()
