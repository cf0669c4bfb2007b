"""HTML-table conversion to pipe markdown and positional table merging."""

from __future__ import annotations

from html.parser import HTMLParser
from typing import Sequence

from ..errors import MalformedTable
from .documents import TableBlock, segment_paragraphs


class _TableGridParser(HTMLParser):
    """Collects (text, colspan, rowspan) cells row by row."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.rows: list[list[tuple[str, int, int]]] = []
        self._cell: list[str] | None = None
        self._spans = (1, 1)

    def handle_starttag(self, tag, attrs):
        if tag == "tr":
            self._flush_cell()
            self.rows.append([])
        elif tag in ("td", "th"):
            self._flush_cell()
            attr_map = dict(attrs)
            self._cell = []
            self._spans = (
                _span_attr(attr_map.get("colspan")),
                _span_attr(attr_map.get("rowspan")),
            )

    def handle_endtag(self, tag):
        if tag in ("td", "th", "tr", "table"):
            self._flush_cell()

    def handle_data(self, data):
        if self._cell is not None:
            self._cell.append(data)

    def _flush_cell(self):
        if self._cell is None:
            return
        if not self.rows:
            self.rows.append([])
        colspan, rowspan = self._spans
        self.rows[-1].append(("".join(self._cell), colspan, rowspan))
        self._cell = None


def _span_attr(value) -> int:
    try:
        return max(1, int(str(value)))
    except (TypeError, ValueError):
        return 1


def _flatten_spans(rows: list[list[tuple[str, int, int]]]) -> list[list[str]]:
    """Expand colspan/rowspan by duplicating cell content into a plain grid."""
    filled: dict[tuple[int, int], str] = {}
    width = 0
    for r, cells in enumerate(rows):
        c = 0
        for text, colspan, rowspan in cells:
            while (r, c) in filled:
                c += 1
            for dr in range(rowspan):
                for dc in range(colspan):
                    filled[(r + dr, c + dc)] = text
            c += colspan
        width = max(width, c if cells else 0)
    if filled:
        width = max(width, max(col for _, col in filled) + 1)
    grid = []
    for r in range(len(rows)):
        grid.append([filled.get((r, c), "") for c in range(width)])
    return grid


def _escape_cell(text: str) -> str:
    # collapse internal whitespace/newlines; escape pipes so cells survive
    return " ".join(text.split()).replace("|", "\\|")


def html_table_to_markdown(html_table: str) -> str:
    """Convert a single HTML table element into a pipe-markdown table.

    The first row becomes the header; colspan/rowspan are flattened by
    duplicating the spanned cell's content.
    """
    parser = _TableGridParser()
    parser.feed(html_table)
    parser.close()
    rows = [r for r in parser.rows if r]
    if not rows:
        raise MalformedTable("no row structure found in table HTML")
    grid = _flatten_spans(rows)
    width = len(grid[0])
    lines = ["| " + " | ".join(_escape_cell(c) for c in grid[0]) + " |"]
    lines.append("| " + " | ".join("---" for _ in range(width)) + " |")
    for row in grid[1:]:
        lines.append("| " + " | ".join(_escape_cell(c) for c in row) + " |")
    return "\n".join(lines)


def merge_tables(text: str, tables: Sequence[TableBlock]) -> str:
    """Insert rendered tables at the nearest paragraph end at/after each anchor.

    Original characters are preserved in order; the result depends only on
    the blocks' anchors (and content), not on their list order.
    """
    if not tables:
        return text
    for block in tables:
        if block.anchor_char_offset > len(text):
            raise ValueError(
                f"table anchor {block.anchor_char_offset} beyond text length {len(text)}"
            )
        if block.anchor_char_offset < 0:
            raise ValueError("table anchor must be non-negative")

    boundaries = [p.end for p in segment_paragraphs(text)] + [len(text)]
    ordered = sorted(
        tables, key=lambda t: (t.anchor_char_offset, t.caption, t.markdown)
    )
    insertions: list[tuple[int, str]] = []
    for block in ordered:
        target = next(
            (b for b in boundaries if b >= block.anchor_char_offset), len(text)
        )
        body = block.markdown.strip("\n")
        if block.caption.strip():
            body = block.caption.strip() + "\n" + body
        insertions.append((target, "\n\n" + body))

    out: list[str] = []
    prev = 0
    for target, rendered in sorted(insertions, key=lambda item: item[0]):
        out.append(text[prev:target])
        out.append(rendered)
        prev = target
    out.append(text[prev:])
    return "".join(out)
