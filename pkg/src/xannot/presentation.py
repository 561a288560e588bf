"""Highlight colors and margin widget placement.

Two redundant visual channels tie a margin widget to its highlight: hue and
spatial proximity. Highlights get colors from a fixed 12-hue palette,
assigned top-to-bottom in the document view and reused cyclically; widgets
are placed in the nearer margin band at their anchor's height, pushed down
just enough to avoid overlap, spilling to the other side when a band runs
out of room.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence

from .errors import DuplicateSelectorId, InvalidPayload, UnknownAnchor, WidgetTooWide
from .model import EntityId

# 12 hues spaced 30 degrees apart (HLS lightness 0.55, saturation 0.65),
# rotated so index 0 is blue. Fixed values; the UI must not recompute them.
PALETTE: tuple[str, ...] = (
    "#4242d7",  # 0 blue
    "#8c42d7",  # 1 violet
    "#d742d7",  # 2 magenta
    "#d7428c",  # 3 pink
    "#d74242",  # 4 red
    "#d78c42",  # 5 orange
    "#d7d742",  # 6 yellow
    "#8cd742",  # 7 lime
    "#42d742",  # 8 green
    "#42d78c",  # 9 spring green
    "#42d7d7",  # 10 cyan
    "#428cd7",  # 11 azure
)

PALETTE_SIZE = len(PALETTE)


def assign_colors(
    highlights: Iterable[tuple[EntityId, int, float, float]],
) -> dict[EntityId, int]:
    """Assign palette indices to highlights by document position.

    Each highlight is ``(selector_id, page_index, y, x)``. Highlights are
    sorted by (page_index, y, x, selector_id) and the i-th gets index
    ``i mod 12``. Assignment is positional, recomputed from scratch on every
    call: adding a highlight above existing ones shifts their colors.
    """
    items = list(highlights)
    seen: set[EntityId] = set()
    for selector_id, _, _, _ in items:
        if selector_id in seen:
            raise DuplicateSelectorId(f"duplicate highlight selector id: {selector_id}")
        seen.add(selector_id)
    ordered = sorted(items, key=lambda h: (h[1], h[2], h[3], h[0]))
    return {h[0]: i % PALETTE_SIZE for i, h in enumerate(ordered)}


@dataclass(frozen=True)
class AnchorBox:
    """The rendered rectangle of one highlight, in viewport pixels.

    y grows downward; page_index orders anchors across pages.
    """

    selector_id: EntityId
    page_index: int
    x: float
    y: float
    w: float
    h: float


@dataclass(frozen=True)
class MarginSpec:
    """Geometry of the two margin bands in the current viewport.

    The viewport spans x in [0, viewport_width]; the left band occupies
    [0, left_width], the right band [viewport_width - right_width,
    viewport_width], and page content sits between them. ``gap`` is the
    minimum vertical spacing between widgets on one side.
    """

    left_width: float
    right_width: float
    page_top: float
    page_bottom: float
    gap: float
    viewport_width: float

    def validate(self) -> list[str]:
        problems = []
        if self.left_width < 0 or self.right_width < 0:
            problems.append("margin widths must be >= 0")
        if self.page_top >= self.page_bottom:
            problems.append("page_top must be < page_bottom")
        if self.gap < 0:
            problems.append("gap must be >= 0")
        if self.left_width + self.right_width > self.viewport_width:
            problems.append("margin bands must fit inside the viewport width")
        return problems


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class WidgetRequest:
    """A pop-up widget to place: one per link, tied to its anchor highlight."""

    link_id: EntityId
    anchor_selector_id: EntityId
    w: float
    h: float


@dataclass(frozen=True)
class WidgetPlacement:
    """A resolved margin position for one widget."""

    link_id: EntityId
    anchor_selector_id: EntityId
    side: Side
    x: float
    y: float
    w: float
    h: float
    palette_index: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "link_id": self.link_id,
            "anchor_selector_id": self.anchor_selector_id,
            "side": self.side.value,
            "x": self.x,
            "y": self.y,
            "w": self.w,
            "h": self.h,
            "palette_index": self.palette_index,
        }


def layout_widgets(
    anchors: Sequence[AnchorBox],
    widgets: Sequence[WidgetRequest],
    margins: MarginSpec,
    colors: dict[EntityId, int],
) -> list[WidgetPlacement]:
    """Place widgets in the margin bands next to their anchors.

    Greedy top-down: widgets are ordered by (anchor page, anchor y, link id)
    and placed on the horizontally nearer side that fits their width (ties
    go right) at their anchor's y, pushed below the previously placed widget
    on that side when overlapping. A widget pushed past page_bottom spills
    to the other side; if that side is full too it is clamped to the bottom.

    All coordinates live in one continuous vertical space: anchors on later
    pages carry larger y values, as in a scrolled document view.
    """
    problems = margins.validate()
    if problems:
        raise InvalidPayload("; ".join(problems))

    boxes = {a.selector_id: a for a in anchors}
    band_left = (0.0, margins.left_width)
    band_right = (margins.viewport_width - margins.right_width, margins.viewport_width)

    def anchor_of(widget: WidgetRequest) -> AnchorBox:
        try:
            return boxes[widget.anchor_selector_id]
        except KeyError:
            raise UnknownAnchor(
                f"widget {widget.link_id} anchored to unknown selector "
                f"{widget.anchor_selector_id}"
            ) from None

    def fits(widget: WidgetRequest, side: Side) -> bool:
        width = margins.left_width if side is Side.LEFT else margins.right_width
        return widget.w <= width

    ordered = sorted(
        widgets, key=lambda wg: (anchor_of(wg).page_index, anchor_of(wg).y, wg.link_id)
    )
    last_bottom: dict[Side, float | None] = {Side.LEFT: None, Side.RIGHT: None}
    placements = []

    for widget in ordered:
        anchor = anchor_of(widget)
        fit_left, fit_right = fits(widget, Side.LEFT), fits(widget, Side.RIGHT)
        if not fit_left and not fit_right:
            raise WidgetTooWide(
                f"widget {widget.link_id} ({widget.w}px) fits in neither margin band"
            )
        if fit_left and fit_right:
            dist_left = max(0.0, anchor.x - band_left[1])
            dist_right = max(0.0, band_right[0] - (anchor.x + anchor.w))
            side = Side.RIGHT if dist_right <= dist_left else Side.LEFT
        else:
            side = Side.LEFT if fit_left else Side.RIGHT

        desired = max(anchor.y, margins.page_top)

        def drop_in(side: Side) -> float:
            y = desired
            prev = last_bottom[side]
            if prev is not None and y < prev + margins.gap:
                y = prev + margins.gap
            return y

        y = drop_in(side)
        if y + widget.h > margins.page_bottom:
            other = Side.RIGHT if side is Side.LEFT else Side.LEFT
            if fits(widget, other):
                side = other
                y = drop_in(side)
            if y + widget.h > margins.page_bottom:
                y = margins.page_bottom - widget.h

        if widget.anchor_selector_id not in colors:
            raise UnknownAnchor(
                f"no color assigned for anchor {widget.anchor_selector_id}"
            )
        x = band_left[1] - widget.w if side is Side.LEFT else band_right[0]
        placements.append(
            WidgetPlacement(
                link_id=widget.link_id,
                anchor_selector_id=widget.anchor_selector_id,
                side=side,
                x=x,
                y=y,
                w=widget.w,
                h=widget.h,
                palette_index=colors[widget.anchor_selector_id],
            )
        )
        last_bottom[side] = y + widget.h

    return placements
