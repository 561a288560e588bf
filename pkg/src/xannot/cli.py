"""Operator command line: run the service, inspect stores, move bundles.

``capture-send`` doubles as a mock external-application plug-in: it builds
a capture payload from flags and posts it to a running service, which is
exactly what a real browser or video-player plug-in would do.

Stdout carries line-oriented, script-stable output; diagnostics go to
stderr. Exit code 0 means the underlying operation succeeded.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import httpx

from .errors import XannotError
from .store import Store, serialize_interchange

DEFAULT_PORT = 8077
DEFAULT_STORE = "xannot.store"


def _fail(exc: XannotError) -> None:
    click.echo(f"{exc.code}: {exc.message}", err=True)
    sys.exit(1)


store_option = click.option(
    "--store",
    "store_path",
    envvar="XANNOT_STORE",
    default=DEFAULT_STORE,
    show_default=True,
    help="Path of the annotation store file (env: XANNOT_STORE).",
)


@click.group()
def main() -> None:
    """Cross-media annotation service and store tools."""


@main.command()
@store_option
@click.option(
    "--port",
    envvar="XANNOT_PORT",
    default=DEFAULT_PORT,
    show_default=True,
    type=int,
    help="Port to listen on (env: XANNOT_PORT).",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--log-level",
    default="info",
    show_default=True,
    type=click.Choice(["critical", "error", "warning", "info", "debug"]),
)
def serve(store_path: str, port: int, host: str, log_level: str) -> None:
    """Run the annotation service."""
    import socket

    import uvicorn

    from .errors import BindFailure
    from .service import create_app

    logging.basicConfig(level=log_level.upper())
    try:
        # preflight both failure modes so they surface as clean errors
        Store(store_path).close()
        probe = socket.socket()
        try:
            probe.bind((host, port))
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
        finally:
            probe.close()

        app = create_app(store_path)
        uvicorn.run(app, host=host, port=port, log_level=log_level)
    except XannotError as exc:
        _fail(exc)


@main.command()
@store_option
def validate(store_path: str) -> None:
    """Check store integrity; exit 0 exactly when the graph is sound."""
    try:
        with Store(store_path) as store:
            report = store.check_integrity()
    except XannotError as exc:
        _fail(exc)
    if report.ok:
        click.echo("ok")
        return
    for problem in (
        *report.dangling_endpoints,
        *report.kind_violations,
        *report.orphan_selectors,
    ):
        click.echo(problem)
    sys.exit(1)


@main.command()
@store_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--document", "document_id", default=None, help="Export only this document's annotations.")
def export(store_path: str, out_path: str, document_id: str | None) -> None:
    """Write the store (or one document's annotations) as an interchange file."""
    try:
        with Store(store_path) as store:
            doc = store.export_document(document_id)
    except XannotError as exc:
        _fail(exc)
    Path(out_path).write_text(serialize_interchange(doc), encoding="utf-8")
    click.echo(
        f"exported {len(doc['resources'])} resources, {len(doc['selectors'])} selectors, "
        f"{len(doc['links'])} links to {out_path}"
    )


@main.command(name="import")
@store_option
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
def import_cmd(store_path: str, in_path: str) -> None:
    """Import an interchange file into the store (ids are remapped)."""
    from .errors import MalformedDocument

    try:
        doc = json.loads(Path(in_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(MalformedDocument(f"cannot read {in_path}: {exc}"))
    try:
        with Store(store_path) as store:
            result = store.import_document(doc)
    except XannotError as exc:
        _fail(exc)
    click.echo(
        f"imported {result.resources_created} resources "
        f"({result.resources_deduped} deduplicated), "
        f"{result.selectors_created} selectors, {result.links_created} links"
    )


@main.command(name="list")
@store_option
@click.argument(
    "what",
    default="resources",
    type=click.Choice(["resources", "selectors", "links"]),
)
@click.option("--json", "as_json", is_flag=True, help="Emit one JSON record per line.")
def list_cmd(store_path: str, what: str, as_json: bool) -> None:
    """Print the store's resources, selectors, or links."""
    try:
        with Store(store_path) as store:
            state = store.state()
    except XannotError as exc:
        _fail(exc)
    tables = {"resources": state.resources, "selectors": state.selectors, "links": state.links}
    entities = sorted(tables[what].values(), key=lambda e: (e.created_at, e.id))
    for entity in entities:
        if as_json:
            click.echo(json.dumps(entity.to_dict(), sort_keys=True, ensure_ascii=False))
        elif what == "resources":
            click.echo(f"{entity.id}\t{entity.kind.value}\t{entity.locator or entity.comment_body}")
        elif what == "selectors":
            from .model import payload_kind

            click.echo(f"{entity.id}\t{entity.resource_id}\t{payload_kind(entity.payload)}")
        else:
            sources = ",".join(e.id for e in entity.sources)
            targets = ",".join(e.id for e in entity.targets)
            click.echo(f"{entity.id}\t{sources}\t{targets}\t{entity.annotation_class.value}")


@main.command(name="capture-send")
@click.option(
    "--url",
    default=None,
    help="Service base URL [default: http://127.0.0.1:$XANNOT_PORT].",
)
@click.option("--port", envvar="XANNOT_PORT", default=DEFAULT_PORT, type=int, hidden=True)
@click.option("--source-app", default="xannot-cli", show_default=True)
@click.option(
    "--kind",
    required=True,
    type=click.Choice(["pdf_document", "web_page", "video", "audio"]),
)
@click.option("--locator", required=True)
@click.option("--title", default=None)
@click.option("--media-type", default=None)
# time segments (video/audio)
@click.option("--start-ms", type=int, default=None)
@click.option("--end-ms", type=int, default=None)
# quoted text (web pages and PDF text spans)
@click.option("--quote", default=None)
@click.option("--prefix", default="")
@click.option("--suffix", default="")
@click.option("--element-path", default=None)
# PDF coordinates
@click.option("--page", type=int, default=None)
@click.option("--char-start", type=int, default=None)
@click.option("--char-end", type=int, default=None)
@click.option("--x", type=float, default=None)
@click.option("--y", type=float, default=None)
@click.option("--w", type=float, default=None)
@click.option("--h", type=float, default=None)
def capture_send(
    url: str | None,
    port: int,
    source_app: str,
    kind: str,
    locator: str,
    title: str | None,
    media_type: str | None,
    start_ms: int | None,
    end_ms: int | None,
    quote: str | None,
    prefix: str,
    suffix: str,
    element_path: str | None,
    page: int | None,
    char_start: int | None,
    char_end: int | None,
    x: float | None,
    y: float | None,
    w: float | None,
    h: float | None,
) -> None:
    """Post a capture payload to a running service (mock plug-in)."""
    if kind in ("video", "audio"):
        if start_ms is None or end_ms is None:
            raise click.UsageError(f"{kind} captures need --start-ms and --end-ms")
        selection: dict = {"kind": "time_segment", "start_ms": start_ms, "end_ms": end_ms}
    elif kind == "web_page":
        if quote is None:
            raise click.UsageError("web_page captures need --quote")
        selection = {
            "kind": "web_fragment",
            "exact_quote": quote,
            "prefix": prefix,
            "suffix": suffix,
            "element_path": element_path,
        }
    elif quote is not None:
        if page is None or char_start is None or char_end is None:
            raise click.UsageError(
                "pdf text captures need --page, --char-start and --char-end"
            )
        selection = {
            "kind": "text_span",
            "page_index": page,
            "char_start": char_start,
            "char_end": char_end,
            "exact_quote": quote,
            "prefix": prefix,
            "suffix": suffix,
        }
    else:
        if None in (page, x, y, w, h):
            raise click.UsageError(
                "pdf region captures need --page, --x, --y, --w and --h"
            )
        selection = {"kind": "page_region", "page_index": page, "x": x, "y": y, "w": w, "h": h}

    resource: dict = {"kind": kind, "locator": locator}
    if title is not None:
        resource["title"] = title
    if media_type is not None:
        resource["media_type"] = media_type
    payload = {"source_app": source_app, "resource": resource, "selection": selection}

    base = url or f"http://127.0.0.1:{port}"
    try:
        response = httpx.post(f"{base}/api/v1/captures", json=payload, timeout=10.0)
    except httpx.HTTPError as exc:
        click.echo(f"ConnectionFailure: {exc}", err=True)
        sys.exit(1)
    body = response.json()
    if response.status_code >= 400:
        click.echo(f"{body.get('code', 'Error')}: {body.get('message', '')}", err=True)
        sys.exit(1)
    click.echo(f"resource_id\t{body['resource_id']}")
    click.echo(f"selector_id\t{body['selector_id']}")


if __name__ == "__main__":
    main()
