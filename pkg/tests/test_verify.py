import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litcurate.errors import UnknownAttribute
from litcurate.ingest.documents import ParserKind, TableBlock
from litcurate.verify import (
    MatchBand,
    MatchGrade,
    build_explanation_prompt,
    fuzzy_ratio,
    fuzzy_ratio_with_span,
    highlight_tokens,
    normalize_for_match,
    provenance_check,
    supporting_paragraphs,
)

from conftest import doc_from_text
from oracles import window_ratio_oracle

HAYSTACK = "the measured strength was 72.6 MPa under load"


def test_verbatim_needle_scores_100():
    assert fuzzy_ratio("72.6 MPa", HAYSTACK) == 100


def test_verbatim_modulo_case_and_whitespace_scores_100():
    assert fuzzy_ratio("  72.6   MPA ", HAYSTACK) == 100


def test_disjoint_alphabets_score_0():
    assert fuzzy_ratio("xyz", "abba abba") == 0


def test_empty_needle_scores_0():
    assert fuzzy_ratio("", HAYSTACK) == 0
    assert fuzzy_ratio("x", "") == 0


def test_one_digit_off_matches_window_oracle():
    # frozen from the brute-force window+Levenshtein oracle: best window
    # "72.6" at distance 1 -> round(100 * 3/4) = 75
    assert window_ratio_oracle("72.5", HAYSTACK) == 75
    assert fuzzy_ratio("72.5", HAYSTACK) == 75


def test_matches_oracle_on_mutated_values():
    cases = [
        ("strenth", HAYSTACK),
        ("measured strenght was", HAYSTACK),
        ("72.66 MPa", HAYSTACK),
        ("under lod", HAYSTACK),
    ]
    for needle, haystack in cases:
        assert abs(fuzzy_ratio(needle, haystack) - window_ratio_oracle(needle, haystack)) <= 1


def test_dissimilar_values_stay_unsupported_like_the_oracle():
    # far-off values can fall outside the window-length band; the exact
    # ratio may then differ from the all-windows oracle, but both verdicts
    # must stay deep in the unsupported band
    needle = "completely absent words"
    assert window_ratio_oracle(needle, HAYSTACK) < 60
    assert fuzzy_ratio(needle, HAYSTACK) < 60


def test_span_points_at_source_window():
    ratio, span = fuzzy_ratio_with_span("72.6 MPa", HAYSTACK)
    assert ratio == 100
    assert HAYSTACK[span[0]:span[1]] == "72.6 MPa"


@settings(max_examples=150)
@given(
    needle=st.text(alphabet="abco ", min_size=0, max_size=12),
    haystack=st.text(alphabet="abcxyz ", min_size=0, max_size=40),
)
def test_ratio_bounded_and_100_iff_verbatim(needle, haystack):
    ratio = fuzzy_ratio(needle, haystack)
    assert 0 <= ratio <= 100
    norm_needle = normalize_for_match(needle)
    norm_hay = normalize_for_match(haystack)
    if ratio == 100:
        assert norm_needle and norm_needle in norm_hay
    if norm_needle and norm_needle in norm_hay:
        assert ratio == 100


def test_band_thresholds():
    assert MatchGrade.band_for(100) == MatchBand.SUPPORTED
    assert MatchGrade.band_for(90) == MatchBand.SUPPORTED
    assert MatchGrade.band_for(89) == MatchBand.PARTIAL
    assert MatchGrade.band_for(60) == MatchBand.PARTIAL
    assert MatchGrade.band_for(59) == MatchBand.UNSUPPORTED
    # configurable bands
    assert MatchGrade.band_for(75, supported=70, partial=50) == MatchBand.SUPPORTED


def test_band_monotonicity():
    order = [MatchBand.UNSUPPORTED, MatchBand.PARTIAL, MatchBand.SUPPORTED]
    previous = 0
    for ratio in range(101):
        current = order.index(MatchGrade.band_for(ratio))
        assert current >= previous
        previous = current


def test_provenance_verbatim_cell_supported():
    doc = doc_from_text("d", "The yield strength was 420 MPa for the alloy.")
    grade = provenance_check("420 MPa", doc)
    assert grade.ratio == 100
    assert grade.band == MatchBand.SUPPORTED
    assert grade.best_span is not None


def test_provenance_empty_cell_unsupported():
    doc = doc_from_text("d", "any text")
    grade = provenance_check("   ", doc)
    assert grade.ratio == 0
    assert grade.band == MatchBand.UNSUPPORTED
    assert grade.best_span is None


def test_provenance_single_digit_change_banded_by_oracle():
    text = "The yield strength was 420 MPa for the alloy."
    doc = doc_from_text("d", text)
    expected = window_ratio_oracle("421 MPa", text)
    grade = provenance_check("421 MPa", doc)
    assert abs(grade.ratio - expected) <= 1
    assert grade.band == MatchGrade.band_for(grade.ratio)


def test_provenance_scans_all_variants_and_tables():
    doc = doc_from_text("d", "generic text only")
    doc.variants[ParserKind.STRUCTURED_TEI] = "structured text with 98.7 value"
    doc.tables = [TableBlock(markdown="| cellcontent |\n| --- |")]
    assert provenance_check("98.7", doc).ratio == 100
    assert provenance_check("cellcontent", doc).ratio == 100


FOUR_PARAS = (
    "Introduction mentions nothing useful.\n\n"
    "The experiment used copper oxide at 300 kelvin.\n\n"
    "Results discuss copper briefly.\n\n"
    "Conclusion has no key terms."
)


def test_supporting_paragraphs_top_k_default_is_three():
    import inspect

    from litcurate.verify import DEFAULT_TOP_K

    assert DEFAULT_TOP_K == 3
    signature = inspect.signature(supporting_paragraphs)
    assert signature.parameters["top_k"].default == 3


def test_supporting_paragraphs_saturates_on_short_docs():
    doc = doc_from_text("d", "Only paragraph one.\n\nOnly paragraph two.")
    scored = supporting_paragraphs(["paragraph"], doc, top_k=3)
    assert len(scored) == 2


def test_paragraph_with_every_query_token_ranks_first():
    doc = doc_from_text("d", FOUR_PARAS)
    scored = supporting_paragraphs(["copper oxide", "300 kelvin"], doc, top_k=4)
    assert scored[0].paragraph.index == 1
    scores = [s.score for s in scored]
    assert scores == sorted(scores, reverse=True)


def test_supporting_ties_break_by_ascending_index():
    doc = doc_from_text("d", "same words here.\n\nsame words here.\n\nsame words here.")
    scored = supporting_paragraphs(["same words"], doc, top_k=3)
    assert [s.paragraph.index for s in scored] == [0, 1, 2]


def test_highlight_wraps_matched_tokens_in_bold():
    doc = doc_from_text("d", FOUR_PARAS)
    scored = supporting_paragraphs(["copper oxide"], doc, top_k=1)
    assert "**copper**" in scored[0].highlighted
    assert "**oxide**" in scored[0].highlighted


def test_highlight_round_trip_strips_to_original():
    doc = doc_from_text("d", FOUR_PARAS)
    for scored in supporting_paragraphs(["copper oxide", "kelvin"], doc, top_k=4):
        assert scored.highlighted.replace("**", "") == scored.paragraph.text


def test_highlight_is_case_preserving():
    text = "Copper was used. COPPER was reused."
    highlighted = highlight_tokens(text, {"copper"})
    assert highlighted == "**Copper** was used. **COPPER** was reused."


def test_explanation_prompt_contains_claim_and_fences():
    prompt = build_explanation_prompt("Score", "91.2", "body text")
    assert "the Score is 91.2" in prompt
    assert prompt.count("[Given Article Start]") == 1
    assert prompt.count("[Given Article End]") == 1
    assert "body text" in prompt


def test_explanation_unknown_attribute_rejected():
    with pytest.raises(UnknownAttribute):
        build_explanation_prompt("Nope", "1", "text", valid_attributes=("Score",))
