"""Cross-media annotation link service for scholarly PDF reading.

Fragments of a PDF can be linked, without copying any content, to fragments
of other PDFs, web pages, videos, and to user comments; the links are
reconstructed, colored, and laid out in the document margins on every
subsequent read.
"""

from .anchoring import (
    AnchorResult,
    AnchorStatus,
    PageTextSnapshot,
    normalize_text,
    resolve_text_anchor,
    validate_selector,
)
from .graph import AnnotationGraph, highlight_position
from .model import (
    AnnotationBundle,
    AnnotationClass,
    CleanupReport,
    Endpoint,
    EndpointKind,
    EntityId,
    Formality,
    Link,
    PageRegion,
    Resource,
    ResourceKind,
    Selector,
    SelectorPayload,
    TextSpan,
    TimeSegment,
    WebFragment,
    new_entity_id,
    now_ms,
)
from .presentation import (
    PALETTE,
    PALETTE_SIZE,
    AnchorBox,
    MarginSpec,
    Side,
    WidgetPlacement,
    WidgetRequest,
    assign_colors,
    layout_widgets,
)
from .store import (
    GraphState,
    ImportResult,
    IntegrityReport,
    Store,
    Transaction,
    check_state_integrity,
    serialize_interchange,
)

__all__ = [
    "AnchorBox",
    "AnchorResult",
    "AnchorStatus",
    "AnnotationBundle",
    "AnnotationClass",
    "AnnotationGraph",
    "CleanupReport",
    "Endpoint",
    "EndpointKind",
    "EntityId",
    "Formality",
    "GraphState",
    "ImportResult",
    "IntegrityReport",
    "Link",
    "MarginSpec",
    "PALETTE",
    "PALETTE_SIZE",
    "PageRegion",
    "PageTextSnapshot",
    "Resource",
    "ResourceKind",
    "Selector",
    "SelectorPayload",
    "Side",
    "Store",
    "TextSpan",
    "TimeSegment",
    "Transaction",
    "WebFragment",
    "WidgetPlacement",
    "WidgetRequest",
    "assign_colors",
    "check_state_integrity",
    "highlight_position",
    "layout_widgets",
    "new_entity_id",
    "normalize_text",
    "now_ms",
    "resolve_text_anchor",
    "serialize_interchange",
    "validate_selector",
]
