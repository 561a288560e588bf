"""Entity types for the resource-selector-link annotation graph.

Three entity kinds make up the graph: a Resource is a whole addressable
artifact (a PDF, web page, video, audio clip, image, or an inline comment),
a Selector addresses a fragment of exactly one resource, and a Link is a
first-class connection with explicit source and target endpoint sets.

No linked content is ever copied into the graph; only locators and selector
metadata are stored. All types are immutable values and safe to share across
threads. The ``to_dict``/``from_dict`` pairs define the interchange field
vocabulary used by the store files and the REST API alike.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

from .errors import InvalidPayload

# Opaque unique identifier: 128 random bits as lowercase hex.
EntityId = str


def new_entity_id() -> EntityId:
    return uuid.uuid4().hex


def now_ms() -> int:
    """Current UTC time in epoch milliseconds (server-side timestamps)."""
    return int(time.time() * 1000)


class ResourceKind(str, Enum):
    PDF_DOCUMENT = "pdf_document"
    WEB_PAGE = "web_page"
    VIDEO = "video"
    AUDIO = "audio"
    IMAGE = "image"
    COMMENT = "comment"


class AnnotationClass(str, Enum):
    COMMENT = "comment"
    EXPLANATION = "explanation"
    EXAMPLE = "example"
    UNSPECIFIED = "unspecified"


class Formality(str, Enum):
    FORMAL = "formal"
    INFORMAL = "informal"
    UNSPECIFIED = "unspecified"


# Context excerpts stored around a quote are capped at this many characters.
CONTEXT_LIMIT = 64


@dataclass(frozen=True)
class Resource:
    """A whole scholarly artifact, or an inline comment.

    Non-comment resources are identified by their locator (URI or content
    hash); comment resources carry their text in ``comment_body`` and have
    no locator.
    """

    id: EntityId
    kind: ResourceKind
    locator: str | None = None
    title: str | None = None
    media_type: str | None = None
    comment_body: str | None = None
    created_at: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "locator": self.locator,
            "title": self.title,
            "media_type": self.media_type,
            "comment_body": self.comment_body,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Resource":
        return cls(
            id=data["id"],
            kind=ResourceKind(data["kind"]),
            locator=data.get("locator"),
            title=data.get("title"),
            media_type=data.get("media_type"),
            comment_body=data.get("comment_body"),
            created_at=int(data.get("created_at", 0)),
        )


@dataclass(frozen=True)
class TextSpan:
    """A character range in the extracted text of one PDF page.

    Offsets are in normalized text space (consecutive whitespace collapsed
    to single spaces). The quote plus up to 64 characters of surrounding
    context make the span re-anchorable after the text shifts.
    """

    page_index: int
    char_start: int
    char_end: int
    exact_quote: str
    prefix: str = ""
    suffix: str = ""

    def validate(self) -> list[str]:
        problems = []
        if self.page_index < 0:
            problems.append("page_index must be >= 0")
        if not (0 <= self.char_start < self.char_end):
            problems.append("char offsets must satisfy 0 <= char_start < char_end")
        if not self.exact_quote:
            problems.append("exact_quote must be non-empty")
        if len(self.prefix) > CONTEXT_LIMIT:
            problems.append(f"prefix longer than {CONTEXT_LIMIT} characters")
        if len(self.suffix) > CONTEXT_LIMIT:
            problems.append(f"suffix longer than {CONTEXT_LIMIT} characters")
        return problems


@dataclass(frozen=True)
class PageRegion:
    """A rectangle on one PDF page, in page-normalized [0,1] coordinates.

    Origin is the top-left corner of the page; y grows downward.
    """

    page_index: int
    x: float
    y: float
    w: float
    h: float

    def validate(self) -> list[str]:
        problems = []
        if self.page_index < 0:
            problems.append("page_index must be >= 0")
        if not (0 <= self.x <= 1 and 0 <= self.y <= 1):
            problems.append("x and y must lie in [0, 1]")
        if self.w <= 0 or self.h <= 0:
            problems.append("w and h must be > 0")
        if self.x + self.w > 1:
            problems.append("x + w must not exceed 1")
        if self.y + self.h > 1:
            problems.append("y + h must not exceed 1")
        return problems


@dataclass(frozen=True)
class TimeSegment:
    """A half-open time range [start_ms, end_ms) of a video or audio clip."""

    start_ms: int
    end_ms: int

    def validate(self) -> list[str]:
        problems = []
        if self.start_ms < 0:
            problems.append("start_ms must be >= 0")
        if self.start_ms >= self.end_ms:
            problems.append("start_ms must be < end_ms")
        return problems


@dataclass(frozen=True)
class WebFragment:
    """A quoted text fragment of a web page.

    ``element_path`` optionally records a structural path of slash-separated
    element names with 1-based ordinals (e.g. ``body/div[2]/p[5]``) to speed
    up relocation; the quote and context remain authoritative.
    """

    exact_quote: str
    prefix: str = ""
    suffix: str = ""
    element_path: str | None = None

    def validate(self) -> list[str]:
        problems = []
        if not self.exact_quote:
            problems.append("exact_quote must be non-empty")
        return problems


SelectorPayload = Union[TextSpan, PageRegion, TimeSegment, WebFragment]

PAYLOAD_KINDS: dict[type, str] = {
    TextSpan: "text_span",
    PageRegion: "page_region",
    TimeSegment: "time_segment",
    WebFragment: "web_fragment",
}

# Which payload kinds may address which resource kinds. Comments and images
# admit no selectors: they are always linked whole.
COMPATIBLE_PAYLOADS: dict[ResourceKind, tuple[type, ...]] = {
    ResourceKind.PDF_DOCUMENT: (TextSpan, PageRegion),
    ResourceKind.WEB_PAGE: (WebFragment,),
    ResourceKind.VIDEO: (TimeSegment,),
    ResourceKind.AUDIO: (TimeSegment,),
    ResourceKind.IMAGE: (),
    ResourceKind.COMMENT: (),
}


def payload_kind(payload: SelectorPayload) -> str:
    return PAYLOAD_KINDS[type(payload)]


def payload_compatible(kind: ResourceKind, payload: SelectorPayload) -> bool:
    return isinstance(payload, COMPATIBLE_PAYLOADS[kind])


def payload_to_dict(payload: SelectorPayload) -> dict[str, Any]:
    data: dict[str, Any] = {"kind": payload_kind(payload)}
    if isinstance(payload, TextSpan):
        data.update(
            page_index=payload.page_index,
            char_start=payload.char_start,
            char_end=payload.char_end,
            exact_quote=payload.exact_quote,
            prefix=payload.prefix,
            suffix=payload.suffix,
        )
    elif isinstance(payload, PageRegion):
        data.update(
            page_index=payload.page_index,
            x=payload.x,
            y=payload.y,
            w=payload.w,
            h=payload.h,
        )
    elif isinstance(payload, TimeSegment):
        data.update(start_ms=payload.start_ms, end_ms=payload.end_ms)
    else:
        data.update(
            exact_quote=payload.exact_quote,
            prefix=payload.prefix,
            suffix=payload.suffix,
            element_path=payload.element_path,
        )
    return data


def payload_from_dict(data: Any) -> SelectorPayload:
    """Parse a selector payload from its wire form.

    Raises InvalidPayload on unknown kinds or missing/ill-typed fields; value
    range checks are left to ``validate()`` so callers can collect them.
    """
    if not isinstance(data, dict):
        raise InvalidPayload("selector payload must be an object")
    kind = data.get("kind")
    try:
        if kind == "text_span":
            return TextSpan(
                page_index=int(data["page_index"]),
                char_start=int(data["char_start"]),
                char_end=int(data["char_end"]),
                exact_quote=str(data["exact_quote"]),
                prefix=str(data.get("prefix", "")),
                suffix=str(data.get("suffix", "")),
            )
        if kind == "page_region":
            return PageRegion(
                page_index=int(data["page_index"]),
                x=float(data["x"]),
                y=float(data["y"]),
                w=float(data["w"]),
                h=float(data["h"]),
            )
        if kind == "time_segment":
            return TimeSegment(start_ms=int(data["start_ms"]), end_ms=int(data["end_ms"]))
        if kind == "web_fragment":
            element_path = data.get("element_path")
            return WebFragment(
                exact_quote=str(data["exact_quote"]),
                prefix=str(data.get("prefix", "")),
                suffix=str(data.get("suffix", "")),
                element_path=None if element_path is None else str(element_path),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPayload(f"malformed {kind} payload: {exc}") from exc
    raise InvalidPayload(f"unknown selector payload kind: {kind!r}")


@dataclass(frozen=True)
class Selector:
    """A fragment of exactly one resource (the refers-to relation)."""

    id: EntityId
    resource_id: EntityId
    payload: SelectorPayload
    created_at: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "resource_id": self.resource_id,
            "payload": payload_to_dict(self.payload),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Selector":
        return cls(
            id=data["id"],
            resource_id=data["resource_id"],
            payload=payload_from_dict(data["payload"]),
            created_at=int(data.get("created_at", 0)),
        )


class EndpointKind(str, Enum):
    RESOURCE = "resource"
    SELECTOR = "selector"


@dataclass(frozen=True)
class Endpoint:
    """One end of a link: either a whole resource or a selector."""

    kind: EndpointKind
    id: EntityId

    @classmethod
    def resource(cls, id: EntityId) -> "Endpoint":
        return cls(EndpointKind.RESOURCE, id)

    @classmethod
    def selector(cls, id: EntityId) -> "Endpoint":
        return cls(EndpointKind.SELECTOR, id)

    def to_dict(self) -> dict[str, str]:
        # Tagged union: exactly one of the two keys is present.
        return {self.kind.value: self.id}

    @classmethod
    def from_dict(cls, data: Any) -> "Endpoint":
        if not isinstance(data, dict) or len(data) != 1:
            raise InvalidPayload(
                "endpoint must be an object with exactly one of the keys "
                "'resource' or 'selector'"
            )
        (tag, entity_id), = data.items()
        if tag not in (EndpointKind.RESOURCE.value, EndpointKind.SELECTOR.value):
            raise InvalidPayload(f"unknown endpoint tag: {tag!r}")
        if not isinstance(entity_id, str) or not entity_id:
            raise InvalidPayload("endpoint id must be a non-empty string")
        return cls(EndpointKind(tag), entity_id)


@dataclass(frozen=True)
class Link:
    """A first-class annotation connection with semantic classification.

    Both endpoint sets are non-empty and no endpoint may appear on both
    sides of the same link.
    """

    id: EntityId
    sources: tuple[Endpoint, ...]
    targets: tuple[Endpoint, ...]
    annotation_class: AnnotationClass = AnnotationClass.UNSPECIFIED
    formality: Formality = Formality.UNSPECIFIED
    created_at: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "sources": [e.to_dict() for e in self.sources],
            "targets": [e.to_dict() for e in self.targets],
            "annotation_class": self.annotation_class.value,
            "formality": self.formality.value,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Link":
        return cls(
            id=data["id"],
            sources=tuple(Endpoint.from_dict(e) for e in data["sources"]),
            targets=tuple(Endpoint.from_dict(e) for e in data["targets"]),
            annotation_class=AnnotationClass(data.get("annotation_class", "unspecified")),
            formality=Formality(data.get("formality", "unspecified")),
            created_at=int(data.get("created_at", 0)),
        )


@dataclass(frozen=True)
class CleanupReport:
    """What a link deletion removed besides the link itself."""

    removed_selectors: tuple[EntityId, ...] = ()
    removed_resources: tuple[EntityId, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "removed_selectors": list(self.removed_selectors),
            "removed_resources": list(self.removed_resources),
        }


@dataclass(frozen=True)
class AnnotationBundle:
    """Everything needed to re-render one document's annotations.

    The bundle is closed: every endpoint id occurring in ``links`` resolves
    to the document, a highlight, a target selector, or a target resource
    within the bundle. ``colors`` maps exactly the highlight selector ids to
    palette indices 0..11.
    """

    document: Resource
    highlights: tuple[Selector, ...]
    links: tuple[Link, ...]
    target_selectors: tuple[Selector, ...]
    target_resources: tuple[Resource, ...]
    colors: dict[EntityId, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "document": self.document.to_dict(),
            "highlights": [s.to_dict() for s in self.highlights],
            "links": [l.to_dict() for l in self.links],
            "target_selectors": [s.to_dict() for s in self.target_selectors],
            "target_resources": [r.to_dict() for r in self.target_resources],
            "colors": dict(self.colors),
        }
