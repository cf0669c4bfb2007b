"""Headless command-line driver: ingest, run, simulate, eval, export, serve.

Human-readable output goes to stdout, structured JSON to stdout under
--json, logs and machine-readable errors to stderr. Exit code is 0 on
success, 1 on engine errors.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .config import EngineConfig, load_config
from .errors import EngineError, InvalidConfig, MalformedDump
from .evaluation import evaluate_dataset, load_dump
from .ingest.parsers import GrobidClient, TikaClient
from .llm import make_llm_provider
from .records import Schema
from .simulate import SimulationConfig, simulate_hatdc
from .store import Store


def engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EngineError as exc:
            click.echo(json.dumps(exc.to_dict()), err=True)
            sys.exit(1)

    return wrapper


def _load_cfg(config_path: str | None, **overrides) -> EngineConfig:
    cfg = load_config(config_path)
    return cfg.updated(**overrides)


def _open_store(cfg: EngineConfig, db: str | None) -> Store:
    clients = [GrobidClient(cfg.grobid_url), TikaClient(cfg.tika_url)]
    return Store(db or cfg.db_path, cfg, parser_clients=clients)


def _resolve_project(store: Store, project: str) -> int:
    found = store.find_project_by_name(project)
    if found is None:
        raise InvalidConfig(f"no such project: {project}")
    return found["project_id"]


@click.group()
def cli() -> None:
    """Literature data curation engine."""


@cli.command()
@click.argument("docs_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--project", required=True, help="Project name (created if missing).")
@click.option("--schema", "schema_file", type=click.Path(exists=True, dir_okay=False),
              help="Schema file (CSV header row or JSON column list); required for a new project.")
@click.option("--db", type=click.Path(), default=None, help="Store database path.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--jobs", type=int, default=None, help="Worker budget (default: logical cores).")
@click.option("--json", "as_json", is_flag=True, default=False)
@engine_errors
def ingest(docs_dir, project, schema_file, db, config_path, jobs, as_json):
    """Create/extend a project by ingesting every document in a directory."""
    cfg = _load_cfg(config_path, jobs=jobs)
    store = _open_store(cfg, db)
    existing = store.find_project_by_name(project)
    if existing is None:
        if not schema_file:
            raise InvalidConfig("--schema is required when creating a new project")
        schema_text = Path(schema_file).read_text(encoding="utf-8")
        existing = store.create_project(project, schema_text)
    project_id = existing["project_id"]

    results = []
    pattern_suffixes = (".txt", ".pdf", ".xml")
    for path in sorted(Path(docs_dir).iterdir()):
        if path.suffix.lower() not in pattern_suffixes:
            continue
        if path.name.lower().endswith(".tables.json"):
            continue
        doc_id = path.stem.removesuffix(".tei")
        results.append(store.add_document(project_id, doc_id, path=str(path)))
    if as_json:
        click.echo(json.dumps({"project_id": project_id, "documents": results}))
    else:
        for result in results:
            click.echo(f"{result['doc_id']}: {result['status']}")
        click.echo(f"ingested {len(results)} documents into project {project!r}")


@cli.command()
@click.option("--project", required=True)
@click.option("--phase", type=click.Choice(["pilot", "batch"]), default="pilot")
@click.option("--docs", default="", help="Comma-separated doc ids (default: all ingested).")
@click.option("--db", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--window", type=int, default=None)
@click.option("--overlap", type=float, default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
@engine_errors
def run(project, phase, docs, db, config_path, jobs, seed, window, overlap, as_json):
    """Run a generation batch over selected documents."""
    cfg = _load_cfg(config_path, jobs=jobs, seed=seed, window=window, overlap=overlap)
    store = _open_store(cfg, db)
    project_id = _resolve_project(store, project)
    if docs:
        doc_ids = [d.strip() for d in docs.split(",") if d.strip()]
    else:
        doc_ids = [
            d["doc_id"]
            for d in store.get_project(project_id)["documents"]
            if d["status"] == "ingested"
        ]
    batch = store.run_batch(project_id, doc_ids, phase)
    if as_json:
        click.echo(json.dumps(batch))
    else:
        click.echo(
            f"batch {batch['batch_id']} ({batch['phase']}): "
            f"{len(batch['records'])} records over {len(batch['doc_ids'])} docs, "
            f"pool v{batch['pool_version_used']}"
        )
        for doc_id, error in batch["failures"].items():
            click.echo(f"  FAILED {doc_id}: {error}", err=True)


@cli.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--k", type=int, default=0, help="Pool size (0 = every other document).")
@click.option("--m", type=int, default=1, help="Shots per prompt.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True, help="Predicted table dump path.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
@engine_errors
def simulate(dataset_dir, k, m, seed, out, config_path, as_json):
    """Mimic the curation workflow over a gold dataset (leave-one-out)."""
    cfg = _load_cfg(config_path, seed=seed)
    dataset_dir = Path(dataset_dir)
    gold_path = dataset_dir / "gold.json"
    if not gold_path.exists():
        raise MalformedDump(f"missing gold dump: {gold_path}")
    gold = load_dump(gold_path)
    schema = Schema.from_names(gold["schema"])
    gold_records = {
        str(doc["doc_id"]): [dict(r) for r in doc["records"]] for doc in gold["documents"]
    }
    documents = []
    for path in sorted(dataset_dir.glob("*.txt")):
        documents.append((path.stem, path.read_text(encoding="utf-8")))
    if not documents:
        raise InvalidConfig(f"no .txt documents in {dataset_dir}")

    llm = make_llm_provider(cfg)
    sim = SimulationConfig(
        documents=documents,
        gold=gold_records,
        schema=schema,
        llm=llm,
        pool_size=k,
        shots=m,
        seed=cfg.seed,
        engine=cfg,
    )
    result = simulate_hatdc(sim)
    Path(out).write_text(
        json.dumps(result.table, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    report = evaluate_dataset(result.table, gold, schema, exact_case=cfg.exact_case)
    if as_json:
        click.echo(json.dumps({"report": report.to_dict(), "out": str(out)}))
    else:
        click.echo(report.format_row(dataset_dir.name))
        click.echo(f"wrote {out}")


@cli.command("eval")
@click.argument("pred", type=click.Path(exists=True, dir_okay=False))
@click.argument("gold", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None, help="Write the JSON report here.")
@click.option("--exact-case", is_flag=True, default=False)
@click.option("--json", "as_json", is_flag=True, default=False)
@engine_errors
def eval_cmd(pred, gold, out, exact_case, as_json):
    """Score a predicted table dump against a gold dump."""
    report = evaluate_dataset(load_dump(pred), load_dump(gold), exact_case=exact_case)
    payload = report.to_dict()
    if out:
        Path(out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if as_json:
        click.echo(json.dumps(payload))
    else:
        click.echo(report.format_row(Path(pred).stem))
        for doc_id, scores in report.per_doc.items():
            click.echo(
                f"  {doc_id}: P={scores.precision:.2f} R={scores.recall:.2f} "
                f"F1={scores.f1:.2f} ChrF={scores.chrf:.2f}"
            )


@cli.command()
@click.option("--project", required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json")
@click.option("--out", type=click.Path(), required=True)
@click.option("--include-irrelevant", is_flag=True, default=False)
@click.option("--db", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@engine_errors
def export(project, fmt, out, include_irrelevant, db, config_path):
    """Export a project's records as CSV or as the JSON table dump."""
    cfg = _load_cfg(config_path)
    store = _open_store(cfg, db)
    project_id = _resolve_project(store, project)
    payload = store.export(project_id, fmt, include_irrelevant)
    Path(out).write_bytes(payload)
    click.echo(f"wrote {out} ({len(payload)} bytes)")


@cli.command()
@click.option("--db", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8400)
@engine_errors
def serve(db, config_path, host, port):
    """Serve the HTTP API the curation UI talks to."""
    import uvicorn

    from .service import create_app

    cfg = _load_cfg(config_path)
    store = _open_store(cfg, db)
    uvicorn.run(create_app(store, cfg), host=host, port=port)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
