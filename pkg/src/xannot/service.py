"""REST service exposing the annotation graph.

Every endpoint is a thin adapter over one core operation; request and
response bodies use the interchange field vocabulary. Errors come back as
``{"code", "message", "details"}`` where the code is the core error name,
so clients can handle failures programmatically.

Mutating requests funnel through the graph's single-writer path; reads work
on immutable snapshots, so requests can be served concurrently.
"""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import presentation
from .anchoring import PageTextSnapshot, resolve_text_anchor
from .errors import InvalidPayload, XannotError
from .graph import AnnotationGraph
from .model import (
    Endpoint,
    EntityId,
    TextSpan,
    new_entity_id,
    now_ms,
    payload_from_dict,
)
from .presentation import AnchorBox, MarginSpec, WidgetRequest
from .store import Store, serialize_interchange

log = logging.getLogger("xannot.service")

API_PREFIX = "/api/v1"


def _package_version() -> str:
    try:
        return metadata.version("xannot")
    except metadata.PackageNotFoundError:
        return "0.0.0-dev"


def _require(data: dict[str, Any], field: str) -> Any:
    if not isinstance(data, dict) or field not in data or data[field] is None:
        raise InvalidPayload(f"missing required field: {field}")
    return data[field]


def _parse_margins(data: Any) -> MarginSpec:
    if not isinstance(data, dict):
        raise InvalidPayload("margins must be an object")
    widths = data.get("side_widths", data)
    try:
        return MarginSpec(
            left_width=float(_require(widths, "left")),
            right_width=float(_require(widths, "right")),
            page_top=float(_require(data, "page_top")),
            page_bottom=float(_require(data, "page_bottom")),
            gap=float(_require(data, "gap")),
            viewport_width=float(_require(data, "viewport_width")),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidPayload(f"malformed margins: {exc}") from exc


def _parse_anchor_box(data: Any) -> AnchorBox:
    try:
        return AnchorBox(
            selector_id=str(_require(data, "selector_id")),
            page_index=int(data.get("page_index", 0)),
            x=float(_require(data, "x")),
            y=float(_require(data, "y")),
            w=float(_require(data, "w")),
            h=float(_require(data, "h")),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidPayload(f"malformed anchor box: {exc}") from exc


def _parse_widget(data: Any) -> WidgetRequest:
    try:
        return WidgetRequest(
            link_id=str(_require(data, "link_id")),
            anchor_selector_id=str(_require(data, "anchor_selector_id")),
            w=float(_require(data, "w")),
            h=float(_require(data, "h")),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidPayload(f"malformed widget request: {exc}") from exc


def create_app(
    store_path: str | Path | None = None,
    *,
    graph: AnnotationGraph | None = None,
    fsync: bool = True,
    id_factory: Callable[[], EntityId] = new_entity_id,
    clock: Callable[[], int] = now_ms,
) -> FastAPI:
    """Build the service app around a store path or a prebuilt graph.

    With a path, the store is opened on startup and flushed/closed on
    shutdown. A prebuilt graph is used as-is and left open (the caller owns
    its lifecycle).
    """
    if (store_path is None) == (graph is None):
        raise ValueError("pass exactly one of store_path or graph")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if graph is not None:
            app.state.graph = graph
            app.state.owned_store = None
        else:
            store = Store(store_path, fsync=fsync)
            app.state.graph = AnnotationGraph(store, id_factory=id_factory, clock=clock)
            app.state.owned_store = store
        try:
            yield
        finally:
            if app.state.owned_store is not None:
                app.state.owned_store.close()

    app = FastAPI(title="xannot annotation service", lifespan=lifespan)

    @app.exception_handler(XannotError)
    async def domain_error(request: Request, exc: XannotError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={
                "code": "InvalidPayload",
                "message": "request body is not valid JSON of the expected shape",
                "details": {"errors": [str(e) for e in exc.errors()]},
            },
        )

    def _graph(request: Request) -> AnnotationGraph:
        return request.app.state.graph

    # -- health --

    @app.get(API_PREFIX + "/health")
    def health(request: Request) -> dict:
        return {
            "status": "ok",
            "version": _package_version(),
            "store_version": _graph(request).store.version,
        }

    # -- resources --

    @app.post(API_PREFIX + "/resources")
    def create_resource(request: Request, body: dict = Body(...)) -> Response:
        kind = _require(body, "kind")
        locator_or_body = (
            body.get("comment_body") if kind == "comment" else body.get("locator")
        ) or ""
        resource, created = _graph(request).ensure_resource(
            kind,
            locator_or_body,
            title=body.get("title"),
            media_type=body.get("media_type"),
        )
        return JSONResponse(status_code=201 if created else 200, content=resource.to_dict())

    @app.get(API_PREFIX + "/resources")
    def list_resources(request: Request, locator: str | None = None) -> list[dict]:
        resources = _graph(request).state().resources.values()
        if locator is not None:
            resources = [r for r in resources if r.locator == locator]
        return [r.to_dict() for r in sorted(resources, key=lambda r: (r.created_at, r.id))]

    @app.get(API_PREFIX + "/resources/{resource_id}")
    def get_resource(request: Request, resource_id: str) -> dict:
        return _graph(request).get_resource(resource_id).to_dict()

    # -- selectors --

    @app.post(API_PREFIX + "/selectors", status_code=201)
    def create_selector(request: Request, body: dict = Body(...)) -> dict:
        selector = _graph(request).create_selector(
            str(_require(body, "resource_id")),
            payload_from_dict(_require(body, "payload")),
        )
        return selector.to_dict()

    @app.get(API_PREFIX + "/selectors/{selector_id}")
    def get_selector(request: Request, selector_id: str) -> dict:
        return _graph(request).get_selector(selector_id).to_dict()

    # -- links --

    @app.post(API_PREFIX + "/links", status_code=201)
    def create_link(request: Request, body: dict = Body(...)) -> dict:
        sources = _require(body, "sources")
        targets = _require(body, "targets")
        if not isinstance(sources, list) or not isinstance(targets, list):
            raise InvalidPayload("sources and targets must be arrays of endpoints")
        link = _graph(request).create_link(
            [Endpoint.from_dict(e) for e in sources],
            [Endpoint.from_dict(e) for e in targets],
            annotation_class=body.get("annotation_class", "unspecified"),
            formality=body.get("formality", "unspecified"),
        )
        return link.to_dict()

    @app.get(API_PREFIX + "/links/{link_id}")
    def get_link(request: Request, link_id: str) -> dict:
        return _graph(request).get_link(link_id).to_dict()

    @app.delete(API_PREFIX + "/links/{link_id}")
    def remove_link(request: Request, link_id: str) -> dict:
        return _graph(request).delete_link(link_id).to_dict()

    # -- traversal --

    @app.get(API_PREFIX + "/documents/{document_id}/annotations")
    def document_annotations(request: Request, document_id: str) -> dict:
        return _graph(request).annotations_for(document_id).to_dict()

    @app.get(API_PREFIX + "/entities/{entity_id}/backlinks")
    def entity_backlinks(request: Request, entity_id: str) -> list[dict]:
        return [l.to_dict() for l in _graph(request).backlinks_for(entity_id)]

    # -- captures (external-application fragments) --

    @app.post(API_PREFIX + "/captures", status_code=201)
    def ingest_capture(request: Request, body: dict = Body(...)) -> dict:
        resource_spec = _require(body, "resource")
        selection = payload_from_dict(_require(body, "selection"))
        source_app = body.get("source_app", "unknown")
        resource, selector = _graph(request).capture(
            str(_require(resource_spec, "kind")),
            str(_require(resource_spec, "locator")),
            selection,
            title=resource_spec.get("title"),
            media_type=resource_spec.get("media_type"),
        )
        log.info(
            "capture from %s: resource=%s selector=%s", source_app, resource.id, selector.id
        )
        return {"resource_id": resource.id, "selector_id": selector.id}

    # -- presentation --

    @app.post(API_PREFIX + "/layout")
    def layout(request: Request, body: dict = Body(...)) -> list[dict]:
        anchors = [_parse_anchor_box(a) for a in _require(body, "anchors")]
        widgets = [_parse_widget(w) for w in _require(body, "widgets")]
        margins = _parse_margins(_require(body, "margins"))
        colors = _require(body, "colors")
        if not isinstance(colors, dict):
            raise InvalidPayload("colors must be a map of selector id to palette index")
        placements = presentation.layout_widgets(
            anchors, widgets, margins, {str(k): int(v) for k, v in colors.items()}
        )
        return [p.to_dict() for p in placements]

    @app.post(API_PREFIX + "/anchors/resolve")
    def resolve_anchor(request: Request, body: dict = Body(...)) -> dict:
        selector_data = dict(_require(body, "selector"))
        selector_data.setdefault("kind", "text_span")
        payload = payload_from_dict(selector_data)
        if not isinstance(payload, TextSpan):
            raise InvalidPayload("anchor resolution works on text_span selectors")
        snapshot_data = _require(body, "snapshot")
        snapshot = PageTextSnapshot(
            page_index=int(_require(snapshot_data, "page_index")),
            text=str(_require(snapshot_data, "text")),
        )
        return resolve_text_anchor(payload, snapshot).to_dict()

    # -- interchange --

    @app.get(API_PREFIX + "/export")
    def export_annotations(request: Request, document: str | None = None) -> Response:
        doc = _graph(request).export_document(document)
        return Response(content=serialize_interchange(doc), media_type="application/json")

    @app.post(API_PREFIX + "/import")
    def import_annotations(request: Request, body: dict = Body(...)) -> dict:
        return _graph(request).import_document(body).to_dict()

    return app
