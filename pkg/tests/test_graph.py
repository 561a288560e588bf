import random

import pytest

from xannot.errors import (
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
from xannot.graph import AnnotationGraph, highlight_position
from xannot.model import (
    Endpoint,
    PageRegion,
    ResourceKind,
    TextSpan,
    TimeSegment,
)
from xannot.store import Store

from .drivers import GraphDriver
from .oracles import backlinks_oracle, color_oracle, deletion_oracle
from .scenario import build_reading_scenario


def state_dicts(graph):
    state = graph.state()
    return (
        {rid: r.to_dict() for rid, r in state.resources.items()},
        {sid: s.to_dict() for sid, s in state.selectors.items()},
        {lid: l.to_dict() for lid, l in state.links.items()},
    )


# --- create_resource -----------------------------------------------------------

def test_minimal_pdf_resource(graph):
    resource = graph.create_resource("pdf_document", "file:///as-we-may-think.pdf")
    assert resource.kind is ResourceKind.PDF_DOCUMENT
    assert resource.locator == "file:///as-we-may-think.pdf"
    assert resource.comment_body is None
    assert resource.created_at > 0


def test_blank_comment_body_is_rejected(graph):
    with pytest.raises(EmptyBody):
        graph.create_resource("comment", "")
    with pytest.raises(EmptyBody):
        graph.create_resource("comment", "   ")


def test_blank_locator_and_unknown_kind_are_rejected(graph):
    with pytest.raises(EmptyLocator):
        graph.create_resource("video", "")
    with pytest.raises(InvalidKind):
        graph.create_resource("hologram", "file:///x")


def test_same_locator_returns_the_same_entity(graph):
    first = graph.create_resource("pdf_document", "file:///dup.pdf")
    # dedup oracle: linear scan of stored locators before the second insert
    stored = [r for r in graph.state().resources.values() if r.locator == "file:///dup.pdf"]
    assert len(stored) == 1
    second = graph.create_resource("pdf_document", "file:///dup.pdf", title="ignored")
    assert second.id == first.id == stored[0].id
    assert len(graph.state().resources) == 1


def test_comments_are_never_deduplicated(graph):
    first = graph.create_resource("comment", "same text")
    second = graph.create_resource("comment", "same text")
    assert first.id != second.id


# --- create_selector ------------------------------------------------------------

def test_text_span_selector_on_pdf(graph):
    doc = graph.create_resource("pdf_document", "file:///doc.pdf")
    selector = graph.create_selector(
        doc.id, TextSpan(0, 10, 25, "As We May Think")
    )
    assert selector.resource_id == doc.id
    assert graph.state().selectors[selector.id] == selector


def test_page_region_on_video_is_incompatible(graph):
    video = graph.create_resource("video", "file:///clip.mp4")
    with pytest.raises(IncompatibleSelectorKind):
        graph.create_selector(video.id, PageRegion(0, 0.1, 0.1, 0.2, 0.2))


def test_zero_length_segment_is_invalid(graph):
    video = graph.create_resource("video", "file:///clip.mp4")
    with pytest.raises(InvalidPayload):
        graph.create_selector(video.id, TimeSegment(5000, 5000))


def test_selector_on_missing_resource(graph):
    with pytest.raises(UnknownResource):
        graph.create_selector("nope", TimeSegment(0, 1))


def test_selector_text_is_normalized_at_creation(graph):
    doc = graph.create_resource("pdf_document", "file:///doc.pdf")
    selector = graph.create_selector(
        doc.id,
        TextSpan(0, 5, 9, "two\twords", prefix="a  b\n", suffix="  c" + "x" * 80),
    )
    assert selector.payload.exact_quote == "two words"
    assert selector.payload.prefix == "a b "
    assert len(selector.payload.suffix) == 64
    assert selector.payload.suffix.startswith(" cx")


# --- create_link -----------------------------------------------------------------

@pytest.fixture
def doc_with_highlight(graph):
    doc = graph.create_resource("pdf_document", "file:///main.pdf")
    highlight = graph.create_selector(doc.id, TextSpan(0, 10, 25, "As We May Think"))
    external = graph.create_resource("pdf_document", "file:///other.pdf")
    region = graph.create_selector(external.id, PageRegion(1, 0.1, 0.2, 0.3, 0.3))
    return doc, highlight, external, region


def test_link_one_source_one_target(graph, doc_with_highlight):
    _, highlight, _, region = doc_with_highlight
    link = graph.create_link(
        [Endpoint.selector(highlight.id)], [Endpoint.selector(region.id)]
    )
    assert len(link.sources) == 1 and len(link.targets) == 1
    assert graph.state().links[link.id] == link


def test_empty_endpoint_lists_are_rejected(graph, doc_with_highlight):
    _, highlight, _, _ = doc_with_highlight
    with pytest.raises(EmptyTargets):
        graph.create_link([Endpoint.selector(highlight.id)], [])
    with pytest.raises(EmptySources):
        graph.create_link([], [Endpoint.selector(highlight.id)])


def test_dangling_endpoint_is_rejected(graph, doc_with_highlight):
    _, highlight, _, _ = doc_with_highlight
    with pytest.raises(DanglingEndpoint):
        graph.create_link(
            [Endpoint.selector(highlight.id)], [Endpoint.selector("ghost")]
        )


def test_endpoint_on_both_sides_is_rejected(graph, doc_with_highlight):
    _, highlight, _, region = doc_with_highlight
    with pytest.raises(SelfReference):
        graph.create_link(
            [Endpoint.selector(highlight.id), Endpoint.selector(region.id)],
            [Endpoint.selector(region.id)],
        )


def test_three_drops_on_one_highlight_make_three_annotations(graph, doc_with_highlight):
    doc, highlight, external, region = doc_with_highlight
    span = graph.create_selector(external.id, TextSpan(2, 0, 9, "something"))
    comment = graph.create_resource("comment", "look here")
    for target in (
        Endpoint.selector(region.id),
        Endpoint.selector(span.id),
        Endpoint.resource(comment.id),
    ):
        graph.create_link([Endpoint.selector(highlight.id)], [target])
    bundle = graph.annotations_for(doc.id)
    assert len(bundle.links) == 3
    assert len(bundle.highlights) == 1
    assert all(Endpoint.selector(highlight.id) in l.sources for l in bundle.links)


# --- delete_link -------------------------------------------------------------------

def test_deleting_sole_comment_link_removes_comment_and_highlight(graph, doc_with_highlight):
    _, highlight, _, _ = doc_with_highlight
    comment = graph.create_resource("comment", "note to self")
    link = graph.create_link(
        [Endpoint.selector(highlight.id)], [Endpoint.resource(comment.id)]
    )
    resources, selectors, links = state_dicts(graph)
    expected = deletion_oracle(resources, selectors, links, link.id)
    report = graph.delete_link(link.id)
    assert (set(report.removed_selectors), set(report.removed_resources)) == expected
    assert comment.id in report.removed_resources  # the comment went away
    assert comment.id not in graph.state().resources
    assert link.id not in graph.state().links
    # comments have no selectors; the one removed selector is the highlight
    assert set(report.removed_selectors) == {highlight.id}


def test_shared_target_selector_survives_single_deletion(graph, doc_with_highlight):
    doc, highlight, external, region = doc_with_highlight
    second_highlight = graph.create_selector(doc.id, TextSpan(3, 5, 12, "another"))
    link_a = graph.create_link(
        [Endpoint.selector(highlight.id)], [Endpoint.selector(region.id)]
    )
    graph.create_link(
        [Endpoint.selector(second_highlight.id)], [Endpoint.selector(region.id)]
    )
    resources, selectors, links = state_dicts(graph)
    expected = deletion_oracle(resources, selectors, links, link_a.id)
    report = graph.delete_link(link_a.id)
    assert (set(report.removed_selectors), set(report.removed_resources)) == expected
    assert region.id in graph.state().selectors  # still referenced by the other link
    assert region.id not in report.removed_selectors


def test_media_resources_are_never_auto_removed(graph, doc_with_highlight):
    _, highlight, external, region = doc_with_highlight
    link = graph.create_link(
        [Endpoint.selector(highlight.id)], [Endpoint.selector(region.id)]
    )
    report = graph.delete_link(link.id)
    assert region.id in report.removed_selectors
    assert external.id in graph.state().resources
    assert report.removed_resources == ()


def test_deleting_unknown_link(graph):
    with pytest.raises(UnknownLink):
        graph.delete_link("nothing")


# --- annotations_for ------------------------------------------------------------------

def test_fresh_document_has_an_empty_bundle(graph):
    doc = graph.create_resource("pdf_document", "file:///fresh.pdf")
    bundle = graph.annotations_for(doc.id)
    assert bundle.highlights == ()
    assert bundle.links == ()
    assert bundle.colors == {}
    assert bundle.document.id == doc.id


def test_bundle_requires_a_pdf_document(graph):
    video = graph.create_resource("video", "file:///clip.mp4")
    with pytest.raises(NotADocument):
        graph.annotations_for(video.id)
    with pytest.raises(UnknownResource):
        graph.annotations_for("missing")


def bundle_is_closed(bundle_dict):
    known = {bundle_dict["document"]["id"]}
    known.update(s["id"] for s in bundle_dict["highlights"])
    known.update(s["id"] for s in bundle_dict["target_selectors"])
    known.update(r["id"] for r in bundle_dict["target_resources"])
    for link in bundle_dict["links"]:
        for endpoint in link["sources"] + link["targets"]:
            (_, eid), = endpoint.items()
            if eid not in known:
                return False
    return True


def test_scenario_bundle_contains_five_resolved_annotations(graph):
    ids = build_reading_scenario(GraphDriver(graph))
    bundle = graph.annotations_for(ids["document_id"])
    assert len(bundle.links) == 5
    assert {l.id for l in bundle.links} == set(ids["links"].values())
    assert [h.id for h in bundle.highlights] == [ids["highlight_id"]]
    assert bundle.colors == {ids["highlight_id"]: 0}
    assert bundle_is_closed(bundle.to_dict())
    # the shared external PDF resolved once, plus web page, video and comment
    target_kinds = sorted(r.kind.value for r in bundle.target_resources)
    assert target_kinds == ["comment", "pdf_document", "video", "web_page"]


def test_bundle_is_deterministic(graph):
    ids = build_reading_scenario(GraphDriver(graph))
    first = graph.annotations_for(ids["document_id"]).to_dict()
    second = graph.annotations_for(ids["document_id"]).to_dict()
    assert first == second


def test_bundle_colors_follow_document_positions(graph):
    doc = graph.create_resource("pdf_document", "file:///multi.pdf")
    comment = graph.create_resource("comment", "why")
    spans = [
        graph.create_selector(doc.id, TextSpan(page, start, start + 4, "word"))
        for page, start in [(1, 40), (0, 100), (0, 7), (2, 5)]
    ]
    for span in spans:
        graph.create_link([Endpoint.selector(span.id)], [Endpoint.resource(comment.id)])
    bundle = graph.annotations_for(doc.id)
    expected = color_oracle(
        [(s.id, *highlight_position(s)) for s in spans]
    )
    assert bundle.colors == expected
    # page 0 offset 7 sorts first
    assert bundle.colors[spans[2].id] == 0


# --- backlinks_for ----------------------------------------------------------------------

def test_untargeted_resource_has_no_backlinks(graph):
    lonely = graph.create_resource("web_page", "https://example.org/lonely")
    assert graph.backlinks_for(lonely.id) == []


def test_backlink_via_region_selector(graph, doc_with_highlight):
    _, highlight, external, region = doc_with_highlight
    link = graph.create_link(
        [Endpoint.selector(highlight.id)], [Endpoint.selector(region.id)]
    )
    assert [l.id for l in graph.backlinks_for(external.id)] == [link.id]
    assert [l.id for l in graph.backlinks_for(region.id)] == [link.id]


def test_backlinks_for_unknown_entity(graph):
    with pytest.raises(UnknownEntity):
        graph.backlinks_for("void")


def test_backlinks_match_brute_force_on_a_random_graph(graph):
    rnd = random.Random(42)
    resources, selectors = [], []
    for i in range(8):
        resources.append(graph.create_resource("pdf_document", f"file:///{i}.pdf"))
    for i in range(10):
        resources.append(graph.create_resource("comment", f"comment {i}"))
    for i in range(30):
        owner = rnd.choice(resources[:8])
        selectors.append(
            graph.create_selector(owner.id, TextSpan(rnd.randint(0, 5), i, i + 3, "app"))
        )
    all_endpoints = [Endpoint.resource(r.id) for r in resources] + [
        Endpoint.selector(s.id) for s in selectors
    ]
    made = 0
    while made < 100:
        sources = rnd.sample(all_endpoints, rnd.randint(1, 2))
        targets = rnd.sample(all_endpoints, rnd.randint(1, 3))
        if set(sources) & set(targets):
            continue
        graph.create_link(sources, targets)
        made += 1

    _, selector_dicts, link_dicts = state_dicts(graph)
    for entity in [r.id for r in resources] + [s.id for s in selectors]:
        expected = backlinks_oracle(selector_dicts, link_dicts, entity)
        assert {l.id for l in graph.backlinks_for(entity)} == expected

    # soundness the other way round: every target is found
    for link in graph.state().links.values():
        for endpoint in link.targets:
            assert link.id in {l.id for l in graph.backlinks_for(endpoint.id)}


# --- invariants over random operation sequences -------------------------------------------

def test_random_operation_sequences_keep_the_graph_sound(tmp_path):
    rnd = random.Random(20260809)
    with Store(tmp_path / "fuzz.store") as store:
        graph = AnnotationGraph(store)
        links = []
        for step in range(300):
            roll = rnd.random()
            if roll < 0.25 or not graph.state().resources:
                kind = rnd.choice(["pdf_document", "web_page", "video", "comment"])
                body = f"note {step}" if kind == "comment" else f"file:///{step % 17}.{kind}"
                graph.create_resource(kind, body)
            elif roll < 0.6:
                docs = [
                    r
                    for r in graph.state().resources.values()
                    if r.kind is ResourceKind.PDF_DOCUMENT
                ]
                comments = [
                    r
                    for r in graph.state().resources.values()
                    if r.kind is ResourceKind.COMMENT
                ]
                if not docs or not comments:
                    continue
                doc = rnd.choice(docs)
                selector = graph.create_selector(
                    doc.id, TextSpan(0, step + 1, step + 5, "text")
                )
                links.append(
                    graph.create_link(
                        [Endpoint.selector(selector.id)],
                        [Endpoint.resource(rnd.choice(comments).id)],
                    )
                )
            elif links:
                link = links.pop(rnd.randrange(len(links)))
                if link.id in graph.state().links:
                    graph.delete_link(link.id)
            report = store.check_integrity()
            assert report.referentially_sound, report.to_dict()
            # backlink index always agrees with full recomputation
            _, selector_dicts, link_dicts = state_dicts(graph)
            state = graph.state()
            for resource_id in list(state.resources)[:5]:
                expected = backlinks_oracle(selector_dicts, link_dicts, resource_id)
                assert {l.id for l in graph.backlinks_for(resource_id)} == expected
