"""Selector validation and text re-anchoring.

Stored text spans carry the exact quote plus up to 64 characters of context
on each side. When the extracted page text shifts between sessions, the
original offsets may no longer hold; ``resolve_text_anchor`` repairs them by
scanning for the quote and scoring surrounding context. Ties surface as
``ambiguous`` and missing quotes as ``orphaned`` rather than guessing.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import PageMismatch
from .model import (
    CONTEXT_LIMIT,
    COMPATIBLE_PAYLOADS,
    PageRegion,
    Resource,
    Selector,
    TextSpan,
    TimeSegment,
    payload_kind,
)

_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Collapse consecutive whitespace to single spaces (idempotent).

    Snapshots and text selectors are normalized at creation, so stored
    offsets are always in normalized space.
    """
    return _WHITESPACE.sub(" ", text)


@dataclass(frozen=True)
class PageTextSnapshot:
    """The full extracted, normalized text of one page."""

    page_index: int
    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", normalize_text(self.text))


class AnchorStatus(str, Enum):
    EXACT = "exact"
    REANCHORED = "reanchored"
    AMBIGUOUS = "ambiguous"
    ORPHANED = "orphaned"


@dataclass(frozen=True)
class AnchorResult:
    """Outcome of resolving a text span against a snapshot.

    Offsets are present exactly when status is exact or reanchored.
    """

    status: AnchorStatus
    resolved_start: int | None = None
    resolved_end: int | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "resolved_start": self.resolved_start,
            "resolved_end": self.resolved_end,
        }


def _context_score(text: str, pos: int, quote_len: int, prefix: str, suffix: str) -> int:
    """+1 per contiguous matching context character adjacent to the quote.

    Prefix characters are compared backwards from the match start, suffix
    characters forwards from the match end, each capped at the stored limit.
    """
    score = 0
    for k in range(1, min(len(prefix), CONTEXT_LIMIT) + 1):
        i = pos - k
        if i < 0 or text[i] != prefix[-k]:
            break
        score += 1
    end = pos + quote_len
    for k in range(min(len(suffix), CONTEXT_LIMIT)):
        j = end + k
        if j >= len(text) or text[j] != suffix[k]:
            break
        score += 1
    return score


def _occurrences(text: str, quote: str) -> list[int]:
    positions = []
    pos = text.find(quote)
    while pos != -1:
        positions.append(pos)
        pos = text.find(quote, pos + 1)
    return positions


def resolve_text_anchor(selector: TextSpan, snapshot: PageTextSnapshot) -> AnchorResult:
    """Resolve a text span against the current page text.

    Returns ``exact`` when the stored offsets still hold, ``reanchored`` with
    shifted offsets when the quote has a unique best-context occurrence,
    ``ambiguous`` when several occurrences score equally, and ``orphaned``
    when the quote is gone.
    """
    if selector.page_index != snapshot.page_index:
        raise PageMismatch(
            f"selector is on page {selector.page_index}, "
            f"snapshot is of page {snapshot.page_index}"
        )
    text = snapshot.text
    quote = selector.exact_quote
    if text[selector.char_start:selector.char_end] == quote:
        return AnchorResult(AnchorStatus.EXACT, selector.char_start, selector.char_end)

    positions = _occurrences(text, quote)
    if not positions:
        return AnchorResult(AnchorStatus.ORPHANED)
    scores = [
        _context_score(text, pos, len(quote), selector.prefix, selector.suffix)
        for pos in positions
    ]
    best = max(scores)
    winners = [pos for pos, score in zip(positions, scores) if score == best]
    if len(winners) > 1:
        return AnchorResult(AnchorStatus.AMBIGUOUS)
    return AnchorResult(AnchorStatus.REANCHORED, winners[0], winners[0] + len(quote))


def validate_selector(
    selector: Selector,
    resource: Resource,
    *,
    page_count: int | None = None,
    duration_ms: int | None = None,
) -> list[str]:
    """Collect all invariant violations of a selector against its resource.

    An empty list means the selector is valid. Media extents (page count,
    clip duration) are checked only when provided.
    """
    payload = selector.payload
    problems = list(payload.validate())
    if not isinstance(payload, COMPATIBLE_PAYLOADS[resource.kind]):
        problems.append(
            f"{payload_kind(payload)} selector not allowed on "
            f"{resource.kind.value} resource"
        )
    if page_count is not None and isinstance(payload, (TextSpan, PageRegion)):
        if payload.page_index >= page_count:
            problems.append(
                f"page_index {payload.page_index} outside document "
                f"({page_count} pages)"
            )
    if duration_ms is not None and isinstance(payload, TimeSegment):
        if payload.end_ms > duration_ms:
            problems.append(
                f"segment ends at {payload.end_ms} ms but clip lasts {duration_ms} ms"
            )
    return problems
