"""Independent oracles the implementation is checked against.

Everything here recomputes expected results by brute force from first
principles, deliberately not sharing code with the implementation paths it
verifies.
"""

from __future__ import annotations

import json
import re
from collections import Counter

PALETTE_SIZE = 12
CONTEXT_CAP = 64


# --- color assignment ---------------------------------------------------------

def color_oracle(highlights):
    """Sort-then-modulo recomputation: (selector_id, page, y, x) tuples in,
    positional palette indices out."""
    ordered = sorted(highlights, key=lambda h: (h[1], h[2], h[3], h[0]))
    return {h[0]: i % PALETTE_SIZE for i, h in enumerate(ordered)}


# --- text anchoring -----------------------------------------------------------

def _collapse(text):
    return re.sub(r"\s+", " ", text)


def anchor_oracle(text, quote, prefix, suffix, char_start, char_end):
    """Naive full-text scan with context scoring.

    Returns (status, start, end) with offsets None unless resolvable.
    """
    text = _collapse(text)
    if text[char_start:char_end] == quote:
        return ("exact", char_start, char_end)
    hits = [
        i for i in range(len(text) - len(quote) + 1) if text[i : i + len(quote)] == quote
    ]
    if not hits:
        return ("orphaned", None, None)

    def score(i):
        matched = 0
        before, wanted = text[max(0, i - CONTEXT_CAP) : i], prefix[-CONTEXT_CAP:]
        for a, b in zip(reversed(before), reversed(wanted)):
            if a != b:
                break
            matched += 1
        after = text[i + len(quote) : i + len(quote) + CONTEXT_CAP]
        for a, b in zip(after, suffix[:CONTEXT_CAP]):
            if a != b:
                break
            matched += 1
        return matched

    scores = [score(i) for i in hits]
    best = max(scores)
    winners = [i for i, s in zip(hits, scores) if s == best]
    if len(winners) > 1:
        return ("ambiguous", None, None)
    return ("reanchored", winners[0], winners[0] + len(quote))


# --- deletion cleanup -----------------------------------------------------------

def deletion_oracle(resources, selectors, links, link_id):
    """Reference-count recomputation over the full entity graph.

    Takes interchange-form dicts keyed by id; returns the (selector ids,
    resource ids) whose removal the deletion of ``link_id`` must cause.
    """
    link = links[link_id]
    counts = Counter()
    for other in links.values():
        if other["id"] == link_id:
            continue
        for endpoint in other["sources"] + other["targets"]:
            (tag, eid), = endpoint.items()
            counts[(tag, eid)] += 1

    removed_selectors, removed_resources = set(), set()
    for endpoint in link["sources"] + link["targets"]:
        (tag, eid), = endpoint.items()
        if counts[(tag, eid)]:
            continue
        if tag == "selector" and eid in selectors:
            removed_selectors.add(eid)
        elif tag == "resource":
            resource = resources.get(eid)
            if resource is not None and resource["kind"] == "comment":
                removed_resources.add(eid)
    return removed_selectors, removed_resources


# --- backlinks -------------------------------------------------------------------

def backlinks_oracle(selectors, links, entity_id):
    """Brute-force scan of every link's targets.

    For a resource, any of its selectors counts as the resource being
    targeted. Returns the set of link ids.
    """
    aliases = {entity_id}
    aliases.update(s["id"] for s in selectors.values() if s["resource_id"] == entity_id)
    found = set()
    for link in links.values():
        for endpoint in link["targets"]:
            (_, eid), = endpoint.items()
            if eid in aliases:
                found.add(link["id"])
    return found


# --- layout ------------------------------------------------------------------------

def check_layout(anchors, widgets, margins, colors, placements):
    """Constraint checker for widget placements; returns a list of violations.

    anchors/widgets are the inputs handed to the layout, margins a MarginSpec,
    placements the output under test.
    """
    problems = []
    by_anchor = {a.selector_id: a for a in anchors}
    if len(placements) != len(widgets):
        problems.append(f"{len(widgets)} widgets in, {len(placements)} placements out")

    bands = {
        "left": (0.0, margins.left_width),
        "right": (margins.viewport_width - margins.right_width, margins.viewport_width),
    }
    for p in placements:
        x0, x1 = bands[p.side.value]
        if not (x0 - 1e-9 <= p.x and p.x + p.w <= x1 + 1e-9):
            problems.append(f"widget {p.link_id} sticks out of its {p.side.value} band")
        if p.y < margins.page_top - 1e-9 or p.y + p.h > margins.page_bottom + 1e-9:
            problems.append(f"widget {p.link_id} leaves the vertical page band")
        if p.palette_index != colors[p.anchor_selector_id]:
            problems.append(f"widget {p.link_id} has the wrong palette index")

    for side in ("left", "right"):
        stack = sorted(
            (p for p in placements if p.side.value == side), key=lambda p: p.y
        )
        for prev, cur in zip(stack, stack[1:]):
            if cur.y < prev.y + prev.h + margins.gap - 1e-9:
                problems.append(
                    f"widgets {prev.link_id} and {cur.link_id} overlap on the {side}"
                )

    # Proximity: a widget whose desired slot is free must sit exactly there.
    for p in placements:
        anchor = by_anchor[p.anchor_selector_id]
        desired = max(anchor.y, margins.page_top)
        if desired + p.h > margins.page_bottom:
            continue
        slot_free = all(
            q is p
            or q.side != p.side
            or q.y + q.h + margins.gap <= desired + 1e-9
            or desired + p.h + margins.gap <= q.y + 1e-9
            for q in placements
        )
        if slot_free and abs(p.y - desired) > 1e-9:
            problems.append(
                f"widget {p.link_id} was displaced to {p.y} although {desired} was free"
            )
    return problems


# --- graph isomorphism ---------------------------------------------------------------

def canonical_graph(doc):
    """Content-based canonical form of an interchange document.

    Two documents describing the same graph up to id renaming produce equal
    canonical forms: every id is replaced by the (recursive) content of the
    entity it denotes.
    """
    resources = {r["id"]: r for r in doc["resources"]}
    selectors = {s["id"]: s for s in doc["selectors"]}

    def res_key(resource):
        return json.dumps(
            {k: v for k, v in resource.items() if k != "id"}, sort_keys=True
        )

    def sel_key(selector):
        return json.dumps(
            {
                "resource": res_key(resources[selector["resource_id"]]),
                "payload": selector["payload"],
                "created_at": selector["created_at"],
            },
            sort_keys=True,
        )

    def endpoint_key(endpoint):
        (tag, eid), = endpoint.items()
        inner = res_key(resources[eid]) if tag == "resource" else sel_key(selectors[eid])
        return json.dumps([tag, inner])

    def link_key(link):
        return json.dumps(
            {
                "sources": sorted(endpoint_key(e) for e in link["sources"]),
                "targets": sorted(endpoint_key(e) for e in link["targets"]),
                "annotation_class": link["annotation_class"],
                "formality": link["formality"],
                "created_at": link["created_at"],
            },
            sort_keys=True,
        )

    return (
        sorted(res_key(r) for r in doc["resources"]),
        sorted(sel_key(s) for s in doc["selectors"]),
        sorted(link_key(l) for l in doc["links"]),
    )
