"""Verification support: provenance grading, supporting paragraphs,
and the on-demand explanation prompt.

The hallucination check compares a generated cell value against the source
text with a best-window partial ratio over Levenshtein distance. Both sides
are casefolded and whitespace-collapsed first; digits are never rounded, so
numeric hallucinations stay visible.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .bm25 import build_index, bm25_score, tokenize
from .errors import UnknownAttribute
from .ingest.documents import Paragraph, ParsedDocument

SUPPORTED_THRESHOLD = 90
PARTIAL_THRESHOLD = 60
WINDOW_COMPARISON_CAP = 20000
DEFAULT_TOP_K = 3


class MatchBand(str, Enum):
    SUPPORTED = "supported"
    PARTIAL = "partial"
    UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class MatchGrade:
    ratio: int  # 0-100
    band: MatchBand
    best_span: tuple[int, int] | None = None  # offsets into the source variant

    @staticmethod
    def band_for(
        ratio: int,
        supported: int = SUPPORTED_THRESHOLD,
        partial: int = PARTIAL_THRESHOLD,
    ) -> MatchBand:
        if ratio >= supported:
            return MatchBand.SUPPORTED
        if ratio >= partial:
            return MatchBand.PARTIAL
        return MatchBand.UNSUPPORTED


@dataclass(frozen=True)
class ScoredParagraph:
    paragraph: Paragraph
    score: float
    highlighted: str


def _normalize_with_map(s: str) -> tuple[str, list[int]]:
    """Casefold + collapse whitespace, keeping normalized->original offsets."""
    chars: list[str] = []
    offsets: list[int] = []
    pending_ws = False
    for i, ch in enumerate(s):
        if ch.isspace():
            pending_ws = True
            continue
        if pending_ws and chars:
            chars.append(" ")
            offsets.append(i - 1)
        pending_ws = False
        for folded in ch.casefold():
            chars.append(folded)
            offsets.append(i)
    return "".join(chars), offsets


def normalize_for_match(s: str) -> str:
    return _normalize_with_map(s)[0]


def _levenshtein_capped(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _window_lengths(nlen: int, hlen: int) -> list[int]:
    """Window lengths of |needle| +- ceil(|needle|/4), clamped to the haystack."""
    pad = -(-nlen // 4)  # ceil
    lengths = list(range(max(1, nlen - pad), min(hlen, nlen + pad) + 1))
    if not lengths:
        lengths = [hlen]
    return lengths


def _prefilter_starts(norm_needle: str, norm_hay: str, max_starts: int) -> list[int]:
    """Coarse trigram voting: likely window starts for a long haystack."""
    positions: dict[str, list[int]] = {}
    for i in range(len(norm_hay) - 2):
        positions.setdefault(norm_hay[i:i + 3], []).append(i)
    votes: Counter[int] = Counter()
    for offset in range(len(norm_needle) - 2):
        gram = norm_needle[offset:offset + 3]
        for p in positions.get(gram, ()):
            votes[max(0, p - offset)] += 1
    if not votes:
        step = max(1, len(norm_hay) // max(1, max_starts))
        return list(range(0, len(norm_hay), step))[:max_starts]
    ranked = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))
    return sorted(start for start, _ in ranked[:max_starts])


def fuzzy_ratio(needle: str, haystack: str) -> int:
    """Best partial ratio (0-100) of needle against windows of haystack."""
    return fuzzy_ratio_with_span(needle, haystack)[0]


def fuzzy_ratio_with_span(needle: str, haystack: str) -> tuple[int, tuple[int, int] | None]:
    """Best ratio plus the matching span in the original haystack.

    100 is reserved for verbatim matches (after normalization); near-misses
    on long values are capped at 99 so the top grade stays trustworthy.
    """
    norm_needle = normalize_for_match(needle)
    norm_hay, offsets = _normalize_with_map(haystack)
    if not norm_needle or not norm_hay:
        return 0, None

    nlen = len(norm_needle)
    hlen = len(norm_hay)

    # exact-substring fast path
    found = norm_hay.find(norm_needle)
    if found >= 0:
        return 100, _original_span(offsets, found, found + nlen, haystack)

    lengths = _window_lengths(nlen, hlen)
    total_windows = sum(max(0, hlen - length + 1) for length in lengths)
    if total_windows > WINDOW_COMPARISON_CAP:
        max_starts = max(1, WINDOW_COMPARISON_CAP // len(lengths))
        starts = _prefilter_starts(norm_needle, norm_hay, max_starts)
    else:
        starts = range(hlen)

    best = 0
    best_span: tuple[int, int] | None = None
    for start in starts:
        for length in lengths:
            if start + length > hlen:
                continue
            window = norm_hay[start:start + length]
            dist = _levenshtein_capped(norm_needle, window)
            ratio = round(100 * (1 - dist / max(nlen, length)))
            if dist > 0:
                ratio = min(ratio, 99)
            if ratio > best:
                best = ratio
                best_span = _original_span(offsets, start, start + length, haystack)
    return best, best_span


def _original_span(offsets: list[int], start: int, end: int, original: str) -> tuple[int, int]:
    if not offsets or end <= start:
        return (0, 0)
    s = offsets[start]
    e = offsets[min(end, len(offsets)) - 1] + 1
    return (s, min(e, len(original)))


def provenance_check(
    cell_value: str,
    doc: ParsedDocument,
    supported: int = SUPPORTED_THRESHOLD,
    partial: int = PARTIAL_THRESHOLD,
) -> MatchGrade:
    """Grade a cell value against every text variant and table block."""
    if not cell_value.strip():
        return MatchGrade(ratio=0, band=MatchBand.UNSUPPORTED)
    best = 0
    best_span: tuple[int, int] | None = None
    sources = list(doc.variants.values()) + [t.markdown for t in doc.tables]
    for source in sources:
        ratio, span = fuzzy_ratio_with_span(cell_value, source)
        if ratio > best:
            best = ratio
            best_span = span
            if best == 100:
                break
    return MatchGrade(
        ratio=best,
        band=MatchGrade.band_for(best, supported, partial),
        best_span=best_span if best > 0 else None,
    )


def highlight_tokens(text: str, tokens: set[str]) -> str:
    """Wrap each whole-word occurrence of a token in ** markers."""
    if not tokens:
        return text
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(t) for t in sorted(tokens, key=len, reverse=True)) + r")\b",
        re.IGNORECASE | re.UNICODE,
    )
    return pattern.sub(lambda m: f"**{m.group(0)}**", text)


def supporting_paragraphs(
    query_cell_values: Sequence[str],
    doc: ParsedDocument,
    top_k: int = DEFAULT_TOP_K,
    k1: float | None = None,
    b: float | None = None,
) -> list[ScoredParagraph]:
    """Top-k paragraphs of the preferred variant, BM25-scored against the
    concatenated cell values, with matched query tokens bolded."""
    paragraphs = doc.preferred_paragraphs()
    if not paragraphs or top_k <= 0:
        return []
    query_tokens = tokenize(" ".join(v for v in query_cell_values if v))
    kwargs = {}
    if k1 is not None:
        kwargs["k1"] = k1
    if b is not None:
        kwargs["b"] = b
    index = build_index([(str(p.index), p.text) for p in paragraphs], **kwargs)
    scored = sorted(
        ((bm25_score(index, query_tokens, str(p.index)), p) for p in paragraphs),
        key=lambda item: (-item[0], item[1].index),
    )
    token_set = set(query_tokens)
    out = []
    for score, paragraph in scored[:top_k]:
        out.append(
            ScoredParagraph(
                paragraph=paragraph,
                score=score,
                highlighted=highlight_tokens(paragraph.text, token_set),
            )
        )
    return out


EXPLANATION_TEMPLATE = (
    "Please find the relevant paragraph that shows that "
    "the {attribute} is {value} from given article.\n"
    "\n"
    "[Given Article Start]\n"
    "{article}\n"
    "[Given Article End]"
)


def build_explanation_prompt(
    attribute: str,
    value: str,
    article_text: str,
    valid_attributes: Sequence[str] | None = None,
) -> str:
    """Render the explanation request for one attribute/value pair."""
    if valid_attributes is not None and attribute not in valid_attributes:
        raise UnknownAttribute(f"attribute not in schema: {attribute}")
    return EXPLANATION_TEMPLATE.format(attribute=attribute, value=value, article=article_text)
