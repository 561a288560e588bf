/**
 * Margin pop-up widgets: one per link, transcluding the link's target at
 * the position the service's layout endpoint assigned, outlined in the
 * anchor highlight's color, with an (x) delete control in the top corner.
 *
 * Web excerpts are rendered as captured quote text with a source link
 * rather than live embeds; video segments play in place, constrained to
 * their captured time range.
 */

import { paletteColor } from "./palette";
import type {
  AnnotationBundle,
  Link,
  Resource,
  Selector,
  TimeSegmentPayload,
  WidgetPlacement,
} from "./types";
import { endpointId as idOf } from "./types";

export const WIDGET_WIDTH = 184;

export function widgetSizeFor(bundle: AnnotationBundle, link: Link): { w: number; h: number } {
  const target = resolveTarget(bundle, link);
  const heights: Record<string, number> = {
    page_region: 140,
    text_span: 120,
    web_fragment: 120,
    time_segment: 150,
    comment: 100,
    resource: 90,
  };
  return { w: WIDGET_WIDTH, h: heights[target.kind] ?? 110 };
}

export interface ResolvedTarget {
  kind: "text_span" | "page_region" | "web_fragment" | "time_segment" | "comment" | "resource";
  selector: Selector | null;
  resource: Resource | null;
}

/** Resolve a link's first target endpoint inside the (closed) bundle. */
export function resolveTarget(bundle: AnnotationBundle, link: Link): ResolvedTarget {
  const target = link.targets[0];
  if (!target) return { kind: "resource", selector: null, resource: null };
  const targetId = idOf(target);

  const selector =
    bundle.target_selectors.find((s) => s.id === targetId) ??
    bundle.highlights.find((s) => s.id === targetId) ??
    null;
  if (selector) {
    const resource =
      bundle.target_resources.find((r) => r.id === selector.resource_id) ??
      (bundle.document.id === selector.resource_id ? bundle.document : null);
    return { kind: selector.payload.kind, selector, resource };
  }

  const resource =
    bundle.target_resources.find((r) => r.id === targetId) ??
    (bundle.document.id === targetId ? bundle.document : null);
  return { kind: resource?.kind === "comment" ? "comment" : "resource", selector: null, resource };
}

function sourceLine(resource: Resource | null): HTMLElement {
  const line = document.createElement("div");
  line.className = "xa-widget-source";
  if (resource?.locator) {
    const anchor = document.createElement("a");
    anchor.href = resource.locator;
    anchor.textContent = resource.title ?? resource.locator;
    anchor.target = "_blank";
    line.appendChild(anchor);
  } else if (resource?.title) {
    line.textContent = resource.title;
  }
  return line;
}

function contentFor(target: ResolvedTarget): HTMLElement {
  const content = document.createElement("div");
  content.className = "xa-widget-content";
  switch (target.kind) {
    case "text_span":
    case "web_fragment": {
      const quote = document.createElement("blockquote");
      quote.textContent = (target.selector?.payload as { exact_quote?: string })?.exact_quote ?? "";
      content.append(quote, sourceLine(target.resource));
      break;
    }
    case "page_region": {
      // transcluded region: shown as a proportional region card until the
      // source document is rendered alongside
      const payload = target.selector?.payload as {
        page_index: number;
        x: number;
        y: number;
        w: number;
        h: number;
      };
      const card = document.createElement("div");
      card.className = "xa-region-card";
      const box = document.createElement("div");
      box.className = "xa-region-card-box";
      box.style.left = `${payload.x * 100}%`;
      box.style.top = `${payload.y * 100}%`;
      box.style.width = `${payload.w * 100}%`;
      box.style.height = `${payload.h * 100}%`;
      card.appendChild(box);
      const caption = document.createElement("div");
      caption.className = "xa-widget-caption";
      caption.textContent = `page ${payload.page_index + 1} region`;
      content.append(card, caption, sourceLine(target.resource));
      break;
    }
    case "time_segment": {
      const payload = target.selector?.payload as TimeSegmentPayload;
      const video = document.createElement("video");
      video.className = "xa-widget-video";
      video.controls = true;
      video.preload = "metadata";
      if (target.resource?.locator) video.src = target.resource.locator;
      video.dataset.startMs = String(payload.start_ms);
      video.dataset.endMs = String(payload.end_ms);
      video.addEventListener("loadedmetadata", () => {
        video.currentTime = payload.start_ms / 1000;
      });
      video.addEventListener("timeupdate", () => {
        if (video.currentTime * 1000 >= payload.end_ms) video.pause();
      });
      const caption = document.createElement("div");
      caption.className = "xa-widget-caption";
      caption.textContent = `${format(payload.start_ms)}–${format(payload.end_ms)}`;
      content.append(video, caption, sourceLine(target.resource));
      break;
    }
    case "comment": {
      const body = document.createElement("p");
      body.className = "xa-widget-comment";
      body.textContent = target.resource?.comment_body ?? "";
      content.appendChild(body);
      break;
    }
    default:
      content.appendChild(sourceLine(target.resource));
  }
  return content;
}

function format(ms: number): string {
  const seconds = Math.floor(ms / 1000);
  return `${Math.floor(seconds / 60)}:${String(seconds % 60).padStart(2, "0")}`;
}

export class WidgetLayer {
  readonly layer: HTMLElement;
  onDelete: ((linkId: string) => void) | null = null;

  constructor(column: HTMLElement) {
    this.layer = document.createElement("div");
    this.layer.className = "xa-widget-layer";
    column.appendChild(this.layer);
  }

  /** Render exactly the service's placements; nothing is repositioned. */
  render(bundle: AnnotationBundle, placements: WidgetPlacement[]): void {
    this.layer.replaceChildren();
    const linksById = new Map(bundle.links.map((l) => [l.id, l]));
    for (const placement of placements) {
      const link = linksById.get(placement.link_id);
      if (!link) continue;
      this.layer.appendChild(this.buildWidget(bundle, link, placement));
    }
  }

  private buildWidget(
    bundle: AnnotationBundle,
    link: Link,
    placement: WidgetPlacement,
  ): HTMLElement {
    const widget = document.createElement("div");
    widget.className = "xa-widget";
    widget.dataset.linkId = link.id;
    widget.dataset.anchorSelectorId = placement.anchor_selector_id;
    widget.dataset.side = placement.side;
    widget.dataset.paletteIndex = String(placement.palette_index);
    widget.style.position = "absolute";
    widget.style.left = `${placement.x}px`;
    widget.style.top = `${placement.y}px`;
    widget.style.width = `${placement.w}px`;
    widget.style.minHeight = `${placement.h}px`;
    widget.style.borderColor = paletteColor(placement.palette_index);

    const close = document.createElement("button");
    close.className = "xa-widget-close";
    close.textContent = "×";
    close.title = "Delete this annotation";
    close.addEventListener("click", () => this.onDelete?.(link.id));

    const badge = document.createElement("span");
    badge.className = "xa-widget-class";
    if (link.annotation_class !== "unspecified") badge.textContent = link.annotation_class;

    widget.append(close, badge, contentFor(resolveTarget(bundle, link)));
    return widget;
  }
}
