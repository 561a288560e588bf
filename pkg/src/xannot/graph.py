"""Semantic operations over the entity graph.

The graph wraps a store and offers the annotation vocabulary: create
resources (deduplicated by locator), selectors, and links; delete a link
with immediate cleanup of entities it orphaned; assemble the closed
annotation bundle of a document; and traverse links backwards from any
entity.

Mutations serialize through a single writer lock; every operation that
writes corresponds to exactly one committed store transaction. Reads work
on immutable snapshots and never block.
"""

from __future__ import annotations

import threading
from typing import Any, Callable, Iterable

from . import presentation
from .anchoring import normalize_text
from .errors import (
    DanglingEndpoint,
    EmptyBody,
    EmptyLocator,
    EmptySources,
    EmptyTargets,
    IncompatibleSelectorKind,
    InvalidKind,
    InvalidPayload,
    NotADocument,
    SelfReference,
    UnknownEntity,
    UnknownLink,
    UnknownResource,
)
from .model import (
    CONTEXT_LIMIT,
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
    WebFragment,
    new_entity_id,
    now_ms,
    payload_compatible,
    payload_kind,
)
from .store import (
    GraphState,
    ImportResult,
    Store,
    Transaction,
    delete_link as del_link,
    delete_resource as del_resource,
    delete_selector as del_selector,
    put_link,
    put_resource,
    put_selector,
)


def _normalized_payload(payload: SelectorPayload) -> SelectorPayload:
    """Normalize quote/context whitespace and trim context to the cap.

    Prefixes keep their trailing characters and suffixes their leading ones:
    the parts adjacent to the quote carry the anchoring signal.
    """
    if isinstance(payload, TextSpan):
        return TextSpan(
            page_index=payload.page_index,
            char_start=payload.char_start,
            char_end=payload.char_end,
            exact_quote=normalize_text(payload.exact_quote),
            prefix=normalize_text(payload.prefix)[-CONTEXT_LIMIT:],
            suffix=normalize_text(payload.suffix)[:CONTEXT_LIMIT],
        )
    if isinstance(payload, WebFragment):
        return WebFragment(
            exact_quote=normalize_text(payload.exact_quote),
            prefix=normalize_text(payload.prefix)[-CONTEXT_LIMIT:],
            suffix=normalize_text(payload.suffix)[:CONTEXT_LIMIT],
            element_path=payload.element_path,
        )
    return payload


def highlight_position(selector: Selector) -> tuple[int, float, float]:
    """Document-order position (page_index, y, x) of a highlight selector.

    Text spans order by character offsets, regions by their normalized page
    coordinates. The mapping is deterministic, which is all color stability
    of a stored document requires.
    """
    payload = selector.payload
    if isinstance(payload, TextSpan):
        return (payload.page_index, float(payload.char_start), float(payload.char_end))
    if isinstance(payload, PageRegion):
        return (payload.page_index, payload.y, payload.x)
    return (0, 0.0, 0.0)


class AnnotationGraph:
    """Entity graph operations bound to one store.

    ``id_factory`` and ``clock`` exist for deterministic tests; production
    code uses random 128-bit ids and the system clock.
    """

    def __init__(
        self,
        store: Store,
        *,
        id_factory: Callable[[], EntityId] = new_entity_id,
        clock: Callable[[], int] = now_ms,
    ):
        self.store = store
        self._id_factory = id_factory
        self._clock = clock
        self._mutate = threading.Lock()

    # -- reads --

    def state(self) -> GraphState:
        return self.store.state()

    def get_resource(self, resource_id: EntityId) -> Resource:
        resource = self.state().resources.get(resource_id)
        if resource is None:
            raise UnknownResource(f"no resource with id {resource_id}")
        return resource

    def get_selector(self, selector_id: EntityId) -> Selector:
        selector = self.state().selectors.get(selector_id)
        if selector is None:
            raise UnknownEntity(f"no selector with id {selector_id}")
        return selector

    def get_link(self, link_id: EntityId) -> Link:
        link = self.state().links.get(link_id)
        if link is None:
            raise UnknownLink(f"no link with id {link_id}")
        return link

    # -- creation --

    def create_resource(
        self,
        kind: ResourceKind | str,
        locator_or_body: str,
        title: str | None = None,
        media_type: str | None = None,
    ) -> Resource:
        """Create a resource, or return the existing one for this locator.

        Comment resources carry their body instead of a locator and are
        never deduplicated.
        """
        return self.ensure_resource(kind, locator_or_body, title, media_type)[0]

    def ensure_resource(
        self,
        kind: ResourceKind | str,
        locator_or_body: str,
        title: str | None = None,
        media_type: str | None = None,
    ) -> tuple[Resource, bool]:
        """Like create_resource, also reporting whether anything was created."""
        try:
            kind = ResourceKind(kind)
        except ValueError:
            raise InvalidKind(f"unknown resource kind: {kind!r}") from None
        if kind is ResourceKind.COMMENT:
            body = (locator_or_body or "").strip()
            if not body:
                raise EmptyBody("comment resources need a non-empty body")
            resource = Resource(
                id=self._id_factory(),
                kind=kind,
                comment_body=body,
                title=title,
                media_type=media_type,
                created_at=self._clock(),
            )
            with self._mutate:
                self.store.commit(Transaction.of(put_resource(resource)))
            return resource, True
        locator = (locator_or_body or "").strip()
        if not locator:
            raise EmptyLocator(f"{kind.value} resources need a non-empty locator")
        with self._mutate:
            existing = self.state().find_resource_by_locator(locator)
            if existing is not None:
                return existing, False
            resource = Resource(
                id=self._id_factory(),
                kind=kind,
                locator=locator,
                title=title,
                media_type=media_type,
                created_at=self._clock(),
            )
            self.store.commit(Transaction.of(put_resource(resource)))
            return resource, True

    def create_selector(self, resource_id: EntityId, payload: SelectorPayload) -> Selector:
        """Create a selector addressing a fragment of an existing resource."""
        with self._mutate:
            selector = self._build_selector(self.state(), resource_id, payload)
            self.store.commit(Transaction.of(put_selector(selector)))
        return selector

    def _build_selector(
        self, state: GraphState, resource_id: EntityId, payload: SelectorPayload
    ) -> Selector:
        resource = state.resources.get(resource_id)
        if resource is None:
            raise UnknownResource(f"no resource with id {resource_id}")
        if not payload_compatible(resource.kind, payload):
            raise IncompatibleSelectorKind(
                f"{payload_kind(payload)} selector not allowed on "
                f"{resource.kind.value} resource"
            )
        payload = _normalized_payload(payload)
        problems = payload.validate()
        if problems:
            raise InvalidPayload("; ".join(problems))
        return Selector(
            id=self._id_factory(),
            resource_id=resource_id,
            payload=payload,
            created_at=self._clock(),
        )

    def create_link(
        self,
        sources: Iterable[Endpoint],
        targets: Iterable[Endpoint],
        annotation_class: AnnotationClass | str = AnnotationClass.UNSPECIFIED,
        formality: Formality | str = Formality.UNSPECIFIED,
    ) -> Link:
        """Connect source endpoints to target endpoints as one link."""
        sources = tuple(sources)
        targets = tuple(targets)
        if not sources:
            raise EmptySources("a link needs at least one source endpoint")
        if not targets:
            raise EmptyTargets("a link needs at least one target endpoint")
        overlap = set(sources) & set(targets)
        if overlap:
            endpoint = next(iter(overlap))
            raise SelfReference(
                f"{endpoint.kind.value} {endpoint.id} appears as both source and target"
            )
        with self._mutate:
            state = self.state()
            for endpoint in (*sources, *targets):
                if not state.endpoint_exists(endpoint):
                    raise DanglingEndpoint(
                        f"{endpoint.kind.value} {endpoint.id} does not exist"
                    )
            link = Link(
                id=self._id_factory(),
                sources=sources,
                targets=targets,
                annotation_class=AnnotationClass(annotation_class),
                formality=Formality(formality),
                created_at=self._clock(),
            )
            self.store.commit(Transaction.of(put_link(link)))
        return link

    def annotate(
        self,
        resource_id: EntityId,
        payload: SelectorPayload,
        targets: Iterable[Endpoint],
        annotation_class: AnnotationClass | str = AnnotationClass.UNSPECIFIED,
        formality: Formality | str = Formality.UNSPECIFIED,
    ) -> tuple[Selector, Link]:
        """Create a highlight selector and its link in one transaction.

        This is the pairing clients are expected to use: the graph never
        holds an unlinked highlight, so integrity stays fully clean after
        the commit.
        """
        targets = tuple(targets)
        if not targets:
            raise EmptyTargets("a link needs at least one target endpoint")
        with self._mutate:
            state = self.state()
            selector = self._build_selector(state, resource_id, payload)
            for endpoint in targets:
                if not state.endpoint_exists(endpoint):
                    raise DanglingEndpoint(
                        f"{endpoint.kind.value} {endpoint.id} does not exist"
                    )
            link = Link(
                id=self._id_factory(),
                sources=(Endpoint.selector(selector.id),),
                targets=targets,
                annotation_class=AnnotationClass(annotation_class),
                formality=Formality(formality),
                created_at=self._clock(),
            )
            self.store.commit(Transaction.of(put_selector(selector), put_link(link)))
        return selector, link

    def capture(
        self,
        kind: ResourceKind | str,
        locator: str,
        payload: SelectorPayload,
        title: str | None = None,
        media_type: str | None = None,
    ) -> tuple[Resource, Selector]:
        """Register an externally captured fragment in one transaction.

        The resource is deduplicated by locator; the fresh selector is ready
        to serve as a link target.
        """
        try:
            kind = ResourceKind(kind)
        except ValueError:
            raise InvalidKind(f"unknown resource kind: {kind!r}") from None
        if kind is ResourceKind.COMMENT:
            raise InvalidKind("captures describe external media, not comments")
        if not (locator or "").strip():
            raise EmptyLocator(f"{kind.value} captures need a locator")
        with self._mutate:
            state = self.state()
            mutations = []
            resource = state.find_resource_by_locator(locator.strip())
            if resource is None:
                resource = Resource(
                    id=self._id_factory(),
                    kind=kind,
                    locator=locator.strip(),
                    title=title,
                    media_type=media_type,
                    created_at=self._clock(),
                )
                mutations.append(put_resource(resource))
                state = GraphState(
                    {**state.resources, resource.id: resource},
                    state.selectors,
                    state.links,
                )
            selector = self._build_selector(state, resource.id, payload)
            mutations.append(put_selector(selector))
            self.store.commit(Transaction(tuple(mutations)))
        return resource, selector

    # -- deletion --

    def delete_link(self, link_id: EntityId) -> CleanupReport:
        """Delete a link and everything it alone kept alive.

        Endpoint selectors whose reference count drops to zero are removed;
        comment resources nothing references any more disappear with it.
        Media resources are never auto-removed.
        """
        with self._mutate:
            state = self.state()
            link = state.links.get(link_id)
            if link is None:
                raise UnknownLink(f"no link with id {link_id}")

            remaining = [l for l in state.links.values() if l.id != link_id]
            referenced: set[tuple[EndpointKind, EntityId]] = set()
            for other in remaining:
                for endpoint in (*other.sources, *other.targets):
                    referenced.add((endpoint.kind, endpoint.id))

            removed_selectors: set[EntityId] = set()
            removed_resources: set[EntityId] = set()
            for endpoint in (*link.sources, *link.targets):
                if (endpoint.kind, endpoint.id) in referenced:
                    continue
                if endpoint.kind is EndpointKind.SELECTOR:
                    if endpoint.id in state.selectors:
                        removed_selectors.add(endpoint.id)
                else:
                    resource = state.resources.get(endpoint.id)
                    if resource is not None and resource.kind is ResourceKind.COMMENT:
                        removed_resources.add(endpoint.id)

            mutations = [del_link(link_id)]
            mutations.extend(del_selector(sid) for sid in sorted(removed_selectors))
            mutations.extend(del_resource(rid) for rid in sorted(removed_resources))
            self.store.commit(Transaction(tuple(mutations)))
        return CleanupReport(
            removed_selectors=tuple(sorted(removed_selectors)),
            removed_resources=tuple(sorted(removed_resources)),
        )

    # -- traversal --

    def annotations_for(self, document_id: EntityId) -> AnnotationBundle:
        """Assemble the closed annotation bundle of a document.

        Deterministic for a fixed store state: highlights are ordered top to
        bottom and colors assigned positionally.
        """
        state = self.state()
        document = state.resources.get(document_id)
        if document is None:
            raise UnknownResource(f"no resource with id {document_id}")
        if document.kind is not ResourceKind.PDF_DOCUMENT:
            raise NotADocument(
                f"annotations are assembled for pdf_document resources, "
                f"not {document.kind.value}"
            )

        doc_selector_ids = {s.id for s in state.selectors_of(document_id)}

        def anchored_here(link: Link) -> bool:
            return any(
                (e.kind is EndpointKind.RESOURCE and e.id == document_id)
                or (e.kind is EndpointKind.SELECTOR and e.id in doc_selector_ids)
                for e in link.sources
            )

        links = [link for link in state.links.values() if anchored_here(link)]

        highlight_ids: set[EntityId] = set()
        for link in links:
            for endpoint in link.sources:
                if endpoint.kind is EndpointKind.SELECTOR and endpoint.id in doc_selector_ids:
                    highlight_ids.add(endpoint.id)

        # Closure: every other endpoint of the included links must resolve
        # inside the bundle.
        other_selector_ids: set[EntityId] = set()
        other_resource_ids: set[EntityId] = set()
        for link in links:
            for endpoint in (*link.sources, *link.targets):
                if endpoint.kind is EndpointKind.SELECTOR:
                    if endpoint.id not in highlight_ids:
                        other_selector_ids.add(endpoint.id)
                elif endpoint.id != document_id:
                    other_resource_ids.add(endpoint.id)

        target_selectors = [state.selectors[i] for i in other_selector_ids]
        for selector in target_selectors:
            if selector.resource_id != document_id:
                other_resource_ids.add(selector.resource_id)

        highlights = sorted(
            (state.selectors[i] for i in highlight_ids),
            key=lambda s: (*highlight_position(s), s.id),
        )
        colors = presentation.assign_colors(
            (s.id, *highlight_position(s)) for s in highlights
        )

        sort_key = lambda e: (e.created_at, e.id)
        return AnnotationBundle(
            document=document,
            highlights=tuple(highlights),
            links=tuple(sorted(links, key=sort_key)),
            target_selectors=tuple(sorted(target_selectors, key=sort_key)),
            target_resources=tuple(
                sorted((state.resources[i] for i in other_resource_ids), key=sort_key)
            ),
            colors=colors,
        )

    def backlinks_for(self, entity_id: EntityId) -> list[Link]:
        """Links targeting this entity; for a resource, also links targeting
        any of its selectors."""
        state = self.state()
        if entity_id in state.selectors:
            found = state.links_targeting(Endpoint.selector(entity_id))
        elif entity_id in state.resources:
            found = list(state.links_targeting(Endpoint.resource(entity_id)))
            for selector in state.selectors_of(entity_id):
                found.extend(state.links_targeting(Endpoint.selector(selector.id)))
        else:
            raise UnknownEntity(f"no resource or selector with id {entity_id}")
        unique = {link.id: link for link in found}
        return sorted(unique.values(), key=lambda l: (l.created_at, l.id))

    # -- interchange --

    def export_document(self, document_id: EntityId | None = None) -> dict[str, Any]:
        return self.store.export_document(document_id)

    def import_document(self, doc: Any) -> ImportResult:
        return self.store.import_document(doc, id_factory=self._id_factory)
