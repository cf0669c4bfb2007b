import re

import pytest

from litcurate.errors import MalformedTable
from litcurate.ingest.documents import TableBlock, segment_paragraphs
from litcurate.ingest.tables import html_table_to_markdown, merge_tables

from oracles import merge_tables_oracle


def parse_markdown_grid(markdown: str) -> list[list[str]]:
    """Test-side pipe-table parser: rows of unescaped cells, separator dropped."""
    rows = []
    for line in markdown.splitlines():
        cells = re.split(r"(?<!\\)\|", line)[1:-1]
        cells = [c.strip().replace("\\|", "|") for c in cells]
        if all(re.fullmatch(r"-{3,}", c) for c in cells):
            continue
        rows.append(cells)
    return rows


def test_single_cell_table():
    assert html_table_to_markdown("<table><tr><td>a</td></tr></table>") == "| a |\n| --- |"


def test_two_by_two_with_header_row():
    html = (
        "<table><tr><th>Name</th><th>Score</th></tr>"
        "<tr><td>bert</td><td>88.5</td></tr></table>"
    )
    # hand-rendered: header + separator + one body row
    assert html_table_to_markdown(html) == (
        "| Name | Score |\n| --- | --- |\n| bert | 88.5 |"
    )


def test_no_rows_is_malformed():
    with pytest.raises(MalformedTable):
        html_table_to_markdown("<div>no rows</div>")


def test_colspan_duplicates_content():
    html = (
        "<table><tr><td colspan='2'>wide</td></tr>"
        "<tr><td>x</td><td>y</td></tr></table>"
    )
    assert parse_markdown_grid(html_table_to_markdown(html)) == [
        ["wide", "wide"],
        ["x", "y"],
    ]


def test_rowspan_duplicates_content():
    html = (
        "<table><tr><td rowspan='2'>tall</td><td>a</td></tr>"
        "<tr><td>b</td></tr></table>"
    )
    assert parse_markdown_grid(html_table_to_markdown(html)) == [
        ["tall", "a"],
        ["tall", "b"],
    ]


def test_inner_pipes_escaped_and_round_trip():
    html = "<table><tr><td>a|b</td><td>plain</td></tr><tr><td>c</td><td>d|e|f</td></tr></table>"
    markdown = html_table_to_markdown(html)
    assert parse_markdown_grid(markdown) == [["a|b", "plain"], ["c", "d|e|f"]]


def test_round_trip_grid_matches_source_cells():
    html = (
        "<table><tr><th>h1</th><th>h2</th><th>h3</th></tr>"
        "<tr><td>one</td><td>two words</td><td>3</td></tr>"
        "<tr><td></td><td>x</td><td>y</td></tr></table>"
    )
    grid = parse_markdown_grid(html_table_to_markdown(html))
    assert grid == [["h1", "h2", "h3"], ["one", "two words", "3"], ["", "x", "y"]]


THREE_PARAS = "Alpha paragraph one.\n\nBeta paragraph two is here.\n\nGamma paragraph three ends."


def test_merge_empty_list_is_identity():
    assert merge_tables(THREE_PARAS, []) == THREE_PARAS


def test_merge_mid_paragraph_inserts_after_paragraph_end():
    blocks = [TableBlock(markdown="| a |\n| --- |", caption="Table 1: caption", anchor_char_offset=5)]
    merged = merge_tables(THREE_PARAS, blocks)
    # frozen from the naive insertion oracle over the 3-paragraph toy doc
    assert merged == (
        "Alpha paragraph one.\n\nTable 1: caption\n| a |\n| --- |\n\n"
        "Beta paragraph two is here.\n\nGamma paragraph three ends."
    )
    assert merged == merge_tables_oracle(
        THREE_PARAS, [(5, "Table 1: caption", "| a |\n| --- |")]
    )


def test_merge_descending_anchor_input_order_outputs_ascending():
    blocks = [
        TableBlock(markdown="| b |\n| --- |", caption="T2", anchor_char_offset=60),
        TableBlock(markdown="| a |\n| --- |", caption="T1", anchor_char_offset=5),
    ]
    merged = merge_tables(THREE_PARAS, blocks)
    assert merged == merge_tables_oracle(
        THREE_PARAS, [(60, "T2", "| b |\n| --- |"), (5, "T1", "| a |\n| --- |")]
    )
    assert merged.index("T1") < merged.index("T2")


def test_merge_is_order_insensitive():
    blocks = [
        TableBlock(markdown="| a |\n| --- |", caption="T1", anchor_char_offset=3),
        TableBlock(markdown="| b |\n| --- |", caption="T2", anchor_char_offset=40),
    ]
    assert merge_tables(THREE_PARAS, blocks) == merge_tables(THREE_PARAS, blocks[::-1])


def test_merge_preserves_original_characters_in_order():
    blocks = [
        TableBlock(markdown="| a |\n| --- |", anchor_char_offset=0),
        TableBlock(markdown="| b |\n| --- |", anchor_char_offset=30),
    ]
    merged = merge_tables(THREE_PARAS, blocks)
    # removing inserted blocks char-by-char must leave the original text
    iterator = iter(merged)
    for ch in THREE_PARAS:
        for candidate in iterator:
            if candidate == ch:
                break
        else:
            pytest.fail("original character lost")


def test_merge_anchor_beyond_text_rejected():
    with pytest.raises(ValueError):
        merge_tables("short", [TableBlock(markdown="| a |\n| --- |", anchor_char_offset=99)])


def test_segment_paragraphs_spans_are_exact():
    text = "  first para\nsame para\n\n\nsecond one\n\n   \n\nthird  "
    paragraphs = segment_paragraphs(text)
    assert [p.text for p in paragraphs] == ["first para\nsame para", "second one", "third"]
    for p in paragraphs:
        assert text[p.start:p.end] == p.text
    starts = [p.start for p in paragraphs]
    ends = [p.end for p in paragraphs]
    assert starts == sorted(starts)
    assert all(e <= s for e, s in zip(ends, starts[1:]))
