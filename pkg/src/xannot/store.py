"""Durable persistence of the entity graph.

The store is a single JSON-lines file: a header line followed by one record
per committed transaction (optionally starting from a snapshot record after
compaction). State is the replay of the log. Every commit rewrites the file
through a temp-file-plus-atomic-rename, so a crash at any point leaves the
last committed version intact. One writer at a time; readers work on
immutable state snapshots.

``export_document``/``import_document`` implement the stable interchange
format (``.xannot.json``): a UTF-8 JSON document with ``schema_version`` and
``resources``/``selectors``/``links`` arrays whose field names match the
entity types exactly. Timestamps are integer epoch milliseconds.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from filelock import FileLock, Timeout

from .errors import (
    IntegrityViolation,
    IoFailure,
    MalformedDocument,
    StoreLocked,
    VersionUnsupported,
)
from .model import (
    Endpoint,
    EndpointKind,
    EntityId,
    Link,
    Resource,
    ResourceKind,
    Selector,
    new_entity_id,
    payload_compatible,
)

_HEADER = {"format": "xannot-store", "format_version": 1}
SCHEMA_VERSION = 1
INTERCHANGE_EXTENSION = ".xannot.json"


class GraphState:
    """An immutable snapshot of the entity graph at one store version.

    The backlink index (target endpoint -> link ids) is derived eagerly so
    reverse traversal never scans; integrity checking deliberately ignores
    it and recomputes from the entity maps.
    """

    __slots__ = ("resources", "selectors", "links", "_backlinks")

    def __init__(
        self,
        resources: Mapping[EntityId, Resource],
        selectors: Mapping[EntityId, Selector],
        links: Mapping[EntityId, Link],
    ):
        self.resources = dict(resources)
        self.selectors = dict(selectors)
        self.links = dict(links)
        backlinks: dict[Endpoint, list[EntityId]] = {}
        for link in self.links.values():
            for endpoint in link.targets:
                backlinks.setdefault(endpoint, []).append(link.id)
        self._backlinks = backlinks

    @classmethod
    def empty(cls) -> "GraphState":
        return cls({}, {}, {})

    def links_targeting(self, endpoint: Endpoint) -> list[Link]:
        return [self.links[lid] for lid in self._backlinks.get(endpoint, ())]

    def selectors_of(self, resource_id: EntityId) -> list[Selector]:
        return [s for s in self.selectors.values() if s.resource_id == resource_id]

    def endpoint_exists(self, endpoint: Endpoint) -> bool:
        if endpoint.kind is EndpointKind.RESOURCE:
            return endpoint.id in self.resources
        return endpoint.id in self.selectors

    def find_resource_by_locator(self, locator: str) -> Resource | None:
        for resource in self.resources.values():
            if resource.locator == locator:
                return resource
        return None


# --- transactions -------------------------------------------------------------

@dataclass(frozen=True)
class Mutation:
    """One put or delete of a single entity."""

    op: str          # "put" | "delete"
    entity_type: str  # "resource" | "selector" | "link"
    entity: Resource | Selector | Link | None = None
    entity_id: EntityId | None = None

    def to_dict(self) -> dict[str, Any]:
        if self.op == "put":
            assert self.entity is not None
            return {"op": "put", "type": self.entity_type, "data": self.entity.to_dict()}
        return {"op": "delete", "type": self.entity_type, "id": self.entity_id}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Mutation":
        entity_type = data["type"]
        if data["op"] == "put":
            parser = {
                "resource": Resource.from_dict,
                "selector": Selector.from_dict,
                "link": Link.from_dict,
            }[entity_type]
            return cls("put", entity_type, entity=parser(data["data"]))
        return cls("delete", entity_type, entity_id=data["id"])


def put_resource(resource: Resource) -> Mutation:
    return Mutation("put", "resource", entity=resource)


def put_selector(selector: Selector) -> Mutation:
    return Mutation("put", "selector", entity=selector)


def put_link(link: Link) -> Mutation:
    return Mutation("put", "link", entity=link)


def delete_resource(resource_id: EntityId) -> Mutation:
    return Mutation("delete", "resource", entity_id=resource_id)


def delete_selector(selector_id: EntityId) -> Mutation:
    return Mutation("delete", "selector", entity_id=selector_id)


def delete_link(link_id: EntityId) -> Mutation:
    return Mutation("delete", "link", entity_id=link_id)


@dataclass(frozen=True)
class Transaction:
    """An ordered list of mutations applied atomically."""

    mutations: tuple[Mutation, ...]

    @classmethod
    def of(cls, *mutations: Mutation) -> "Transaction":
        return cls(tuple(mutations))


def apply_transaction(state: GraphState, tx: Transaction) -> GraphState:
    resources = dict(state.resources)
    selectors = dict(state.selectors)
    links = dict(state.links)
    tables: dict[str, dict] = {
        "resource": resources,
        "selector": selectors,
        "link": links,
    }
    for mutation in tx.mutations:
        table = tables[mutation.entity_type]
        if mutation.op == "put":
            table[mutation.entity.id] = mutation.entity
        else:
            table.pop(mutation.entity_id, None)
    return GraphState(resources, selectors, links)


# --- integrity ------------------------------------------------------------------

@dataclass(frozen=True)
class IntegrityReport:
    """Result of a full integrity recomputation over one state."""

    dangling_endpoints: tuple[str, ...] = ()
    orphan_selectors: tuple[str, ...] = ()
    kind_violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.dangling_endpoints or self.orphan_selectors or self.kind_violations)

    @property
    def referentially_sound(self) -> bool:
        """True when only soft problems (orphan selectors) remain."""
        return not (self.dangling_endpoints or self.kind_violations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "dangling_endpoints": list(self.dangling_endpoints),
            "orphan_selectors": list(self.orphan_selectors),
            "kind_violations": list(self.kind_violations),
        }


def check_state_integrity(state: GraphState) -> IntegrityReport:
    """Recompute integrity from the entity maps alone (no derived indices)."""
    dangling: list[str] = []
    orphans: list[str] = []
    kind_violations: list[str] = []

    for selector in state.selectors.values():
        resource = state.resources.get(selector.resource_id)
        if resource is None:
            dangling.append(
                f"selector {selector.id} refers to missing resource {selector.resource_id}"
            )
            continue
        if not payload_compatible(resource.kind, selector.payload):
            kind_violations.append(
                f"selector {selector.id} has a payload incompatible with "
                f"{resource.kind.value} resource {resource.id}"
            )
        for problem in selector.payload.validate():
            kind_violations.append(f"selector {selector.id}: {problem}")

    for resource in state.resources.values():
        if resource.kind is ResourceKind.COMMENT:
            if not resource.comment_body:
                kind_violations.append(f"comment resource {resource.id} has no body")
            if resource.locator:
                kind_violations.append(f"comment resource {resource.id} has a locator")
        else:
            if not resource.locator:
                kind_violations.append(
                    f"{resource.kind.value} resource {resource.id} has no locator"
                )
            if resource.comment_body:
                kind_violations.append(
                    f"{resource.kind.value} resource {resource.id} carries a comment body"
                )

    referenced: set[EntityId] = set()
    for link in state.links.values():
        if not link.sources:
            kind_violations.append(f"link {link.id} has no sources")
        if not link.targets:
            kind_violations.append(f"link {link.id} has no targets")
        for endpoint in set(link.sources) & set(link.targets):
            kind_violations.append(
                f"link {link.id} uses {endpoint.kind.value} {endpoint.id} "
                "as both source and target"
            )
        for role, endpoints in (("source", link.sources), ("target", link.targets)):
            for endpoint in endpoints:
                if not state.endpoint_exists(endpoint):
                    dangling.append(
                        f"link {link.id} {role} {endpoint.kind.value} "
                        f"{endpoint.id} does not exist"
                    )
                if endpoint.kind is EndpointKind.SELECTOR:
                    referenced.add(endpoint.id)

    for selector_id in state.selectors:
        if selector_id not in referenced:
            orphans.append(f"selector {selector_id} is not referenced by any link")

    return IntegrityReport(
        dangling_endpoints=tuple(sorted(dangling)),
        orphan_selectors=tuple(sorted(orphans)),
        kind_violations=tuple(sorted(kind_violations)),
    )


# --- export / import ---------------------------------------------------------------

def _sorted_entities(entities: Iterable) -> list:
    return sorted(entities, key=lambda e: (e.created_at, e.id))


def serialize_interchange(doc: dict[str, Any]) -> str:
    """Canonical interchange serialization: byte-stable for fixed entities."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class ImportResult:
    """Outcome of importing an interchange document."""

    id_map: dict[EntityId, EntityId]
    resources_created: int
    resources_deduped: int
    selectors_created: int
    links_created: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "id_map": dict(self.id_map),
            "resources_created": self.resources_created,
            "resources_deduped": self.resources_deduped,
            "selectors_created": self.selectors_created,
            "links_created": self.links_created,
        }


def build_interchange(
    state: GraphState, document_id: EntityId | None = None
) -> dict[str, Any]:
    """Assemble an interchange document from a state snapshot.

    Without a document id the whole graph is exported. With one, the export
    is the closed annotation sub-graph of that document: the document, the
    links anchored on it, and every entity those links reference.
    """
    if document_id is None:
        resources = list(state.resources.values())
        selectors = list(state.selectors.values())
        links = list(state.links.values())
    else:
        from .errors import UnknownResource  # local import avoids cycle noise

        if document_id not in state.resources:
            raise UnknownResource(f"no resource with id {document_id}")
        doc_selector_ids = {s.id for s in state.selectors_of(document_id)}
        links = [
            link
            for link in state.links.values()
            if any(
                (e.kind is EndpointKind.RESOURCE and e.id == document_id)
                or (e.kind is EndpointKind.SELECTOR and e.id in doc_selector_ids)
                for e in link.sources
            )
        ]
        selector_ids: set[EntityId] = set()
        resource_ids: set[EntityId] = {document_id}
        for link in links:
            for endpoint in (*link.sources, *link.targets):
                if endpoint.kind is EndpointKind.SELECTOR:
                    selector_ids.add(endpoint.id)
                else:
                    resource_ids.add(endpoint.id)
        for selector_id in selector_ids:
            selector = state.selectors.get(selector_id)
            if selector is not None:
                resource_ids.add(selector.resource_id)
        selectors = [state.selectors[i] for i in selector_ids if i in state.selectors]
        resources = [state.resources[i] for i in resource_ids if i in state.resources]

    return {
        "schema_version": SCHEMA_VERSION,
        "resources": [r.to_dict() for r in _sorted_entities(resources)],
        "selectors": [s.to_dict() for s in _sorted_entities(selectors)],
        "links": [l.to_dict() for l in _sorted_entities(links)],
    }


def parse_interchange(
    doc: Any,
) -> tuple[list[Resource], list[Selector], list[Link]]:
    """Validate an interchange document and parse its entities.

    Raises VersionUnsupported for unknown schema versions and
    MalformedDocument for anything structurally or referentially broken.
    """
    if not isinstance(doc, dict):
        raise MalformedDocument("interchange document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionUnsupported(f"unsupported schema_version: {version!r}")
    try:
        resources = [Resource.from_dict(r) for r in doc.get("resources", [])]
        selectors = [Selector.from_dict(s) for s in doc.get("selectors", [])]
        links = [Link.from_dict(l) for l in doc.get("links", [])]
    except Exception as exc:
        raise MalformedDocument(f"cannot parse interchange entities: {exc}") from exc

    state = GraphState(
        {r.id: r for r in resources},
        {s.id: s for s in selectors},
        {l.id: l for l in links},
    )
    if (
        len(state.resources) != len(resources)
        or len(state.selectors) != len(selectors)
        or len(state.links) != len(links)
    ):
        raise MalformedDocument("duplicate entity ids in interchange document")
    report = check_state_integrity(state)
    if not report.referentially_sound:
        problems = report.dangling_endpoints + report.kind_violations
        raise MalformedDocument(
            "interchange document is not self-contained: " + "; ".join(problems)
        )
    return resources, selectors, links


# --- the store itself ----------------------------------------------------------------

class Store:
    """Single-file store with atomic commits and monotone versions.

    Commits serialize through an internal lock (single writer); ``state()``
    hands out immutable snapshots that stay valid while later commits land.
    A sibling ``.lock`` file guards against two processes opening the same
    store for writing.
    """

    def __init__(
        self,
        path: str | Path,
        *,
        fsync: bool = True,
        compact_threshold: int = 256,
        lock_timeout: float = 0.0,
    ):
        self.path = Path(path)
        self._fsync = fsync
        self._compact_threshold = compact_threshold
        self._write_lock = threading.Lock()
        self._import_mutex = threading.Lock()
        self._fail_after_write = False  # test hook: crash between write and rename
        self._lock = FileLock(str(self.path) + ".lock")
        try:
            self._lock.acquire(timeout=lock_timeout)
        except Timeout:
            raise StoreLocked(f"store {self.path} is locked by another process") from None
        try:
            self._records: list[str] = []
            self._state = GraphState.empty()
            self.version = 0
            if self.path.exists():
                self._load()
            else:
                self._write_file([])
        except BaseException:
            self._lock.release()
            raise

    # -- lifecycle --

    def close(self) -> None:
        if self._lock.is_locked:
            self._lock.release()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- reading --

    def state(self) -> GraphState:
        return self._state

    def check_integrity(self) -> IntegrityReport:
        return check_state_integrity(self._state)

    # -- writing --

    def commit(self, tx: Transaction) -> int:
        """Apply a transaction atomically; returns the new version.

        The resulting state must be referentially sound (no dangling
        references, no kind violations); otherwise IntegrityViolation is
        raised and nothing changes, on disk or in memory. Unreferenced
        selectors are tolerated: captures legitimately create a selector
        before the link that will use it.
        """
        with self._write_lock:
            new_state = apply_transaction(self._state, tx)
            report = check_state_integrity(new_state)
            if not report.referentially_sound:
                raise IntegrityViolation(
                    "transaction would break graph integrity", report=report
                )
            new_version = self.version + 1
            record = json.dumps(
                {"v": new_version, "ops": [m.to_dict() for m in tx.mutations]},
                ensure_ascii=False,
                sort_keys=True,
            )
            records = self._records + [record]
            if len(records) > self._compact_threshold:
                records = [self._snapshot_record(new_state, new_version)]
            self._write_file(records)
            self._records = records
            self._state = new_state
            self.version = new_version
            return new_version

    def export_document(self, document_id: EntityId | None = None) -> dict[str, Any]:
        return build_interchange(self._state, document_id)

    def import_document(
        self,
        doc: Any,
        *,
        id_factory: Callable[[], EntityId] = new_entity_id,
    ) -> ImportResult:
        """Import an interchange document as one atomic transaction.

        Every imported entity receives a fresh id, except non-comment
        resources whose locator already exists in the store: those map onto
        the existing resource (so re-importing shares media, while links are
        duplicated). Timestamps travel with the document.
        """
        resources, selectors, links = parse_interchange(doc)
        with self._import_mutex:
            id_map: dict[EntityId, EntityId] = {}
            mutations: list[Mutation] = []
            created = deduped = 0
            for resource in resources:
                existing = (
                    self._state.find_resource_by_locator(resource.locator)
                    if resource.locator
                    else None
                )
                if existing is not None:
                    id_map[resource.id] = existing.id
                    deduped += 1
                    continue
                new_id = id_factory()
                id_map[resource.id] = new_id
                mutations.append(
                    put_resource(
                        Resource(
                            id=new_id,
                            kind=resource.kind,
                            locator=resource.locator,
                            title=resource.title,
                            media_type=resource.media_type,
                            comment_body=resource.comment_body,
                            created_at=resource.created_at,
                        )
                    )
                )
                created += 1
            for selector in selectors:
                new_id = id_factory()
                id_map[selector.id] = new_id
                mutations.append(
                    put_selector(
                        Selector(
                            id=new_id,
                            resource_id=id_map[selector.resource_id],
                            payload=selector.payload,
                            created_at=selector.created_at,
                        )
                    )
                )
            for link in links:
                new_id = id_factory()
                id_map[link.id] = new_id
                mutations.append(
                    put_link(
                        Link(
                            id=new_id,
                            sources=tuple(
                                Endpoint(e.kind, id_map[e.id]) for e in link.sources
                            ),
                            targets=tuple(
                                Endpoint(e.kind, id_map[e.id]) for e in link.targets
                            ),
                            annotation_class=link.annotation_class,
                            formality=link.formality,
                            created_at=link.created_at,
                        )
                    )
                )
            self.commit(Transaction(tuple(mutations)))
            return ImportResult(
                id_map=id_map,
                resources_created=created,
                resources_deduped=deduped,
                selectors_created=len(selectors),
                links_created=len(links),
            )

    # -- internals --

    @staticmethod
    def _snapshot_record(state: GraphState, version: int) -> str:
        snapshot = {
            "resources": [r.to_dict() for r in _sorted_entities(state.resources.values())],
            "selectors": [s.to_dict() for s in _sorted_entities(state.selectors.values())],
            "links": [l.to_dict() for l in _sorted_entities(state.links.values())],
        }
        return json.dumps(
            {"v": version, "snapshot": snapshot}, ensure_ascii=False, sort_keys=True
        )

    def _write_file(self, records: list[str]) -> None:
        tmp = self.path.with_name(self.path.name + ".tmp")
        content = "\n".join([json.dumps(_HEADER, sort_keys=True), *records]) + "\n"
        try:
            with open(tmp, "w", encoding="utf-8") as handle:
                handle.write(content)
                handle.flush()
                if self._fsync:
                    os.fsync(handle.fileno())
            if self._fail_after_write:
                raise IoFailure("simulated crash between write and rename")
            os.replace(tmp, self.path)
        except OSError as exc:
            raise IoFailure(f"cannot write store file {self.path}: {exc}") from exc

    def _load(self) -> None:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read store file {self.path}: {exc}") from exc
        if not lines:
            return
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise IoFailure(f"store file {self.path} has a corrupt header") from exc
        if header.get("format") != _HEADER["format"]:
            raise IoFailure(f"{self.path} is not an annotation store file")
        if header.get("format_version") != _HEADER["format_version"]:
            raise VersionUnsupported(
                f"store format_version {header.get('format_version')!r} not supported"
            )
        state = GraphState.empty()
        version = 0
        records: list[str] = []
        for index, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IoFailure(
                    f"store file {self.path} is corrupt at line {index}"
                ) from exc
            if "snapshot" in record:
                snapshot = record["snapshot"]
                state = GraphState(
                    {r["id"]: Resource.from_dict(r) for r in snapshot["resources"]},
                    {s["id"]: Selector.from_dict(s) for s in snapshot["selectors"]},
                    {l["id"]: Link.from_dict(l) for l in snapshot["links"]},
                )
            else:
                tx = Transaction(
                    tuple(Mutation.from_dict(m) for m in record["ops"])
                )
                state = apply_transaction(state, tx)
            version = record["v"]
            records.append(line)
        self._state = state
        self.version = version
        self._records = records
