import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xannot.anchoring import (
    AnchorStatus,
    PageTextSnapshot,
    normalize_text,
    resolve_text_anchor,
    validate_selector,
)
from xannot.errors import PageMismatch
from xannot.model import (
    PageRegion,
    Resource,
    ResourceKind,
    Selector,
    TextSpan,
    TimeSegment,
    WebFragment,
)

from .oracles import anchor_oracle

BASE_TEXT = (
    "The memex article frames associative indexing as the essential step "
    "beyond rigid classification schemes used by libraries."
)


def span_for(text, quote, context=24):
    start = text.index(quote)
    end = start + len(quote)
    return TextSpan(
        page_index=0,
        char_start=start,
        char_end=end,
        exact_quote=quote,
        prefix=text[max(0, start - context):start],
        suffix=text[end:end + context],
    )


def oracle_for(selector, text):
    return anchor_oracle(
        text,
        selector.exact_quote,
        selector.prefix,
        selector.suffix,
        selector.char_start,
        selector.char_end,
    )


def test_unchanged_text_resolves_exactly():
    selector = span_for(BASE_TEXT, "associative indexing")
    result = resolve_text_anchor(selector, PageTextSnapshot(0, BASE_TEXT))
    assert result.status is AnchorStatus.EXACT
    assert (result.resolved_start, result.resolved_end) == (
        selector.char_start,
        selector.char_end,
    )


def test_insertion_before_quote_reanchors_with_shifted_offsets():
    selector = span_for(BASE_TEXT, "associative indexing")
    shifted = "XXXXX " + BASE_TEXT
    result = resolve_text_anchor(selector, PageTextSnapshot(0, shifted))
    expected = oracle_for(selector, shifted)
    assert (result.status.value, result.resolved_start, result.resolved_end) == expected
    assert result.status is AnchorStatus.REANCHORED
    assert result.resolved_start == selector.char_start + 6
    assert shifted[result.resolved_start:result.resolved_end] == selector.exact_quote


def test_deleted_quote_is_orphaned():
    selector = span_for(BASE_TEXT, "associative indexing")
    gutted = BASE_TEXT.replace("associative indexing", "")
    result = resolve_text_anchor(selector, PageTextSnapshot(0, gutted))
    assert result.status is AnchorStatus.ORPHANED
    assert result.resolved_start is None and result.resolved_end is None


def test_equal_context_duplicates_are_ambiguous():
    text = "alpha TOKEN beta ... alpha TOKEN beta"
    selector = TextSpan(0, 99, 104, "TOKEN", prefix="alpha ", suffix=" beta")
    result = resolve_text_anchor(selector, PageTextSnapshot(0, text))
    assert result.status is AnchorStatus.AMBIGUOUS
    assert oracle_for(selector, text)[0] == "ambiguous"


def test_context_disambiguates_duplicates():
    text = "alpha TOKEN beta ... gamma TOKEN delta"
    start = text.index("TOKEN", 20)
    selector = TextSpan(0, start + 3, start + 8, "TOKEN", prefix="gamma ", suffix=" delta")
    result = resolve_text_anchor(selector, PageTextSnapshot(0, text))
    assert result.status is AnchorStatus.REANCHORED
    assert result.resolved_start == start
    assert oracle_for(selector, text) == ("reanchored", start, start + 5)


def test_page_mismatch_is_rejected():
    selector = span_for(BASE_TEXT, "memex")
    with pytest.raises(PageMismatch):
        resolve_text_anchor(selector, PageTextSnapshot(3, BASE_TEXT))


def test_resolution_is_pure():
    selector = span_for(BASE_TEXT, "memex")
    snapshot = PageTextSnapshot(0, "prefix words " + BASE_TEXT)
    assert resolve_text_anchor(selector, snapshot) == resolve_text_anchor(selector, snapshot)


@given(st.text())
def test_normalization_is_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once
    assert "  " not in once and "\n" not in once and "\t" not in once


words = st.lists(
    st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=8), min_size=3, max_size=30
)


@settings(max_examples=200)
@given(words, st.integers(min_value=1, max_value=40), st.randoms())
def test_random_prefix_insertions_reanchor_single_occurrence_quotes(parts, extra, rnd):
    text = normalize_text(" ".join(parts))
    # pick a word-aligned quote that occurs exactly once
    candidates = [w for w in set(parts) if text.count(w) == 1]
    if not candidates:
        return
    quote = rnd.choice(sorted(candidates))
    selector = span_for(text, quote)
    insertion = "#" * extra + " "
    shifted = normalize_text(insertion + text)
    result = resolve_text_anchor(selector, PageTextSnapshot(0, shifted))
    expected = oracle_for(selector, shifted)
    assert (result.status.value, result.resolved_start, result.resolved_end) == expected
    assert result.status is AnchorStatus.REANCHORED
    assert shifted[result.resolved_start:result.resolved_end] == quote


def test_snapshot_normalizes_its_text():
    snapshot = PageTextSnapshot(0, "spaced\t\tout\n\ntext  here")
    assert snapshot.text == "spaced out text here"


# --- validate_selector --------------------------------------------------------

VIDEO = Resource(id="v1", kind=ResourceKind.VIDEO, locator="file:///clip.mp4")
PDF = Resource(id="p1", kind=ResourceKind.PDF_DOCUMENT, locator="file:///doc.pdf")


def test_segment_within_duration_is_ok():
    selector = Selector(id="s", resource_id="v1", payload=TimeSegment(0, 1000))
    assert validate_selector(selector, VIDEO, duration_ms=10_000) == []


def test_segment_beyond_duration_is_flagged():
    selector = Selector(id="s", resource_id="v1", payload=TimeSegment(0, 20_000))
    problems = validate_selector(selector, VIDEO, duration_ms=10_000)
    assert any("10000 ms" in p for p in problems)


def test_region_overflowing_the_page_is_flagged():
    selector = Selector(id="s", resource_id="p1", payload=PageRegion(0, 0.9, 0.1, 0.2, 0.2))
    problems = validate_selector(selector, PDF)
    assert any("x + w" in p for p in problems)


def test_page_out_of_range_is_flagged():
    selector = Selector(id="s", resource_id="p1", payload=TextSpan(9, 0, 4, "word"))
    problems = validate_selector(selector, PDF, page_count=5)
    assert any("page_index 9" in p for p in problems)


def test_incompatible_kind_is_flagged():
    selector = Selector(id="s", resource_id="v1", payload=WebFragment("quoted"))
    problems = validate_selector(selector, VIDEO)
    assert any("not allowed" in p for p in problems)


def test_validation_collects_every_violation_without_mutating():
    payload = TimeSegment(5000, 4000)
    selector = Selector(id="s", resource_id="p1", payload=payload)
    problems = validate_selector(selector, PDF, duration_ms=1000)
    assert len(problems) >= 2  # bad range and wrong resource kind
    assert payload == TimeSegment(5000, 4000)
