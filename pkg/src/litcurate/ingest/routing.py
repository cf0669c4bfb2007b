"""Source routing: text-layer probing and the OCR-then-parse plan."""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

from ..errors import UnreadableSource
from .documents import ParserKind

BOTH_PARSERS = (ParserKind.STRUCTURED_TEI, ParserKind.GENERIC_TEXT)


@dataclass(frozen=True)
class TextLayerProbe:
    source_uri: str
    byte_size: int
    has_text_layer: bool


@dataclass(frozen=True)
class IngestPlan:
    ocr: bool
    parser_kinds: tuple[ParserKind, ...] = BOTH_PARSERS


def probe_source(path: str | Path) -> TextLayerProbe:
    """Cheap text-layer probe: file size plus a font-marker sniff for PDFs."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise UnreadableSource(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".pdf":
        has_text = b"/Font" in raw or b"/Text" in raw
    else:
        has_text = bool(raw.strip())
    return TextLayerProbe(str(path), len(raw), has_text)


def route_document(probe: TextLayerProbe) -> IngestPlan:
    """Decide direct-parse vs OCR-then-parse; both parser kinds always run."""
    if probe.byte_size <= 0:
        raise UnreadableSource(f"empty source: {probe.source_uri}")
    return IngestPlan(ocr=not probe.has_text_layer)


def run_ocr(command_template: str, input_path: str | Path, output_path: str | Path) -> Path:
    """Run the configured OCR command ({input}/{output} placeholders).

    OCR itself is an external tool; the engine only shells out and records
    that it happened.
    """
    if not command_template.strip():
        raise UnreadableSource("no OCR command configured for image-only source")
    command = [
        part.format(input=str(input_path), output=str(output_path))
        for part in shlex.split(command_template)
    ]
    try:
        subprocess.run(command, check=True, capture_output=True)
    except (OSError, subprocess.CalledProcessError) as exc:
        raise UnreadableSource(f"OCR command failed: {exc}") from exc
    out = Path(output_path)
    if not out.exists():
        raise UnreadableSource(f"OCR produced no output at {out}")
    return out
