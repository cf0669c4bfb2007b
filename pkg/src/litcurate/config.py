"""Engine configuration.

The config file is flat ``key = value`` text; blank lines and ``#`` comments
are ignored. Every CLI flag has a config-key counterpart so flag values
round-trip through a file. API tokens are never stored in the file; they come
from the environment variables named here.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InvalidConfig

LLM_TOKEN_ENV = "LITCURATE_LLM_TOKEN"
API_TOKEN_ENV = "LITCURATE_API_TOKEN"


@dataclass
class EngineConfig:
    # parser / OCR endpoints
    grobid_url: str = "http://localhost:8070"
    tika_url: str = "http://localhost:9998"
    ocr_command: str = ""  # e.g. "ocrmypdf {input} {output}"; empty = OCR unavailable

    # LLM provider
    llm_provider: str = "mock"  # "http" or "mock"
    llm_url: str = "http://localhost:8000/v1/chat/completions"
    llm_model: str = "gpt-4o"
    llm_context_chars: int = 48000
    mock_fixture: str = ""  # path to a scripted-response JSON file

    # embeddings
    embedding_provider: str = "lexical"  # "http" or "lexical"
    embedding_url: str = "http://localhost:8001/embed"
    embedding_dim: int = 512

    # chunking
    window: int = 0  # 0 = derive from llm_context_chars
    overlap: float = 0.10

    # retrieval / sampling
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    shots: int = 1  # m
    pool_size: int = 0  # k; 0 = use the whole correction pool
    icl_excerpt_chars: int = 1200

    # alignment / verification
    suggest_threshold: float = 0.5
    supported_band: int = 90
    partial_band: int = 60
    fuzzy_window_cap: int = 20000
    support_top_k: int = 3

    # curation
    pilot_cap: int = 10

    # run control
    seed: int = 0
    jobs: int = 0  # 0 = logical cores
    exact_case: bool = False

    # store
    db_path: str = "litcurate.db"

    @property
    def llm_token(self) -> str:
        return os.environ.get(LLM_TOKEN_ENV, "")

    @property
    def api_token(self) -> str:
        return os.environ.get(API_TOKEN_ENV, "")

    def updated(self, **overrides) -> "EngineConfig":
        """Copy with non-None overrides applied."""
        clean = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **clean)


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def _parse_value(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if ftype == "bool":
        if raw.lower() in {"1", "true", "yes", "on"}:
            return True
        if raw.lower() in {"0", "false", "no", "off"}:
            return False
        raise InvalidConfig(f"{key}: not a boolean: {raw!r}")
    if ftype == "int":
        try:
            return int(raw)
        except ValueError:
            raise InvalidConfig(f"{key}: not an integer: {raw!r}") from None
    if ftype == "float":
        try:
            return float(raw)
        except ValueError:
            raise InvalidConfig(f"{key}: not a number: {raw!r}") from None
    return raw


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Load a config file; a missing/None path yields pure defaults."""
    cfg = EngineConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise InvalidConfig(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfig(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise InvalidConfig(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    return dataclasses.replace(cfg, **values)


def save_config(cfg: EngineConfig, path: str | Path) -> None:
    lines = []
    for f in fields(EngineConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
