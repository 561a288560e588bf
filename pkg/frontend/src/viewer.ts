/**
 * Central document view: stacked page blocks between two margin bands,
 * with text highlights painted from the service's bundle colors.
 *
 * Pages render narrower than the reader column, which is what opens the
 * grey margin space the widgets live in. All vertical coordinates are one
 * continuous column space (later pages sit lower).
 */

import { highlightFill, paletteColor } from "./palette";
import type { DocumentSource } from "./sources";
import type { AnchorBoxInput, Selector } from "./types";

export interface ViewerGeometry {
  viewportWidth: number;
  marginLeft: number;
  marginRight: number;
  gap: number;
}

export interface TextSpanRef {
  pageIndex: number;
  charStart: number;
  charEnd: number;
}

/** Column-relative pixel measurement, injectable for layout-less DOMs. */
export interface Measurer {
  anchorBox(selectorId: string): { x: number; y: number; w: number; h: number } | null;
  pageBottom(): number;
}

export class DomMeasurer implements Measurer {
  constructor(private readonly column: HTMLElement) {}

  anchorBox(selectorId: string) {
    const element = this.column.querySelector(
      `[data-selector-id="${selectorId}"]`,
    ) as HTMLElement | null;
    if (!element) return null;
    const rect = element.getBoundingClientRect();
    const origin = this.column.getBoundingClientRect();
    return {
      x: rect.left - origin.left,
      y: rect.top - origin.top,
      w: rect.width || 1,
      h: rect.height || 1,
    };
  }

  pageBottom(): number {
    return Math.max(this.column.scrollHeight, 400);
  }
}

interface PaintableHighlight {
  selector: Selector;
  colorIndex: number | null; // null = pending (not yet linked)
}

export class DocumentViewer {
  readonly column: HTMLElement;
  private readonly pageBodies: HTMLElement[] = [];
  private readonly regionLayers: HTMLElement[] = [];
  zoom = 1.0;

  onHighlightDrop: ((selectorId: string, dataText: string) => void) | null = null;

  constructor(
    host: HTMLElement,
    readonly source: DocumentSource,
    readonly geometry: ViewerGeometry,
  ) {
    this.column = document.createElement("div");
    this.column.className = "xa-column";
    this.column.style.position = "relative";
    this.column.style.width = `${geometry.viewportWidth}px`;
    host.appendChild(this.column);
  }

  get contentWidth(): number {
    const area =
      this.geometry.viewportWidth - this.geometry.marginLeft - this.geometry.marginRight;
    return Math.max(100, area * this.zoom);
  }

  async render(): Promise<void> {
    this.column.replaceChildren();
    this.pageBodies.length = 0;
    this.regionLayers.length = 0;
    const area =
      this.geometry.viewportWidth - this.geometry.marginLeft - this.geometry.marginRight;
    const left = this.geometry.marginLeft + Math.max(0, (area - this.contentWidth) / 2);

    for (let pageIndex = 0; pageIndex < this.source.pageCount(); pageIndex += 1) {
      const page = document.createElement("div");
      page.className = "xa-page";
      page.dataset.pageIndex = String(pageIndex);
      page.style.marginLeft = `${left}px`;
      page.style.position = "relative";

      const body = document.createElement("div");
      body.className = "xa-page-body";
      await this.source.renderPage(pageIndex, body, this.contentWidth);

      const regions = document.createElement("div");
      regions.className = "xa-region-layer";

      page.append(body, regions);
      this.column.appendChild(page);
      this.pageBodies.push(body);
      this.regionLayers.push(regions);
    }
  }

  setZoom(zoom: number): void {
    this.zoom = Math.min(2.0, Math.max(0.4, zoom));
  }

  /** Repaint all highlights from the given selectors and service colors. */
  paintHighlights(
    highlights: Selector[],
    colors: Record<string, number>,
    pending: Selector | null,
  ): void {
    const paintable: PaintableHighlight[] = highlights
      .filter((h) => h.id !== pending?.id)
      .map((h) => ({ selector: h, colorIndex: colors[h.id] ?? null }));
    if (pending) paintable.push({ selector: pending, colorIndex: null });

    for (let pageIndex = 0; pageIndex < this.pageBodies.length; pageIndex += 1) {
      this.paintPage(
        pageIndex,
        paintable.filter(
          (p) => "page_index" in p.selector.payload && p.selector.payload.page_index === pageIndex,
        ),
      );
    }
  }

  private paintPage(pageIndex: number, highlights: PaintableHighlight[]): void {
    const body = this.pageBodies[pageIndex];
    const regions = this.regionLayers[pageIndex];
    if (!body || !regions) return;
    regions.replaceChildren();

    if (this.source.supportsTextOffsets) {
      const text = this.source.pageText(pageIndex);
      const spans = highlights
        .filter((p) => p.selector.payload.kind === "text_span")
        .map((p) => ({
          start: (p.selector.payload as { char_start: number }).char_start,
          end: (p.selector.payload as { char_end: number }).char_end,
          paint: p,
        }))
        .filter((s) => s.start < s.end && s.end <= text.length)
        .sort((a, b) => a.start - b.start);

      body.replaceChildren();
      let cursor = 0;
      for (const span of spans) {
        if (span.start < cursor) continue; // overlapping ranges: first wins
        if (span.start > cursor) {
          body.appendChild(document.createTextNode(text.slice(cursor, span.start)));
        }
        body.appendChild(this.markFor(span.paint, text.slice(span.start, span.end)));
        cursor = span.end;
      }
      if (cursor < text.length) {
        body.appendChild(document.createTextNode(text.slice(cursor)));
      }
    }

    // page regions paint into the overlay layer with percentage geometry
    for (const paint of highlights) {
      if (paint.selector.payload.kind !== "page_region") continue;
      const { x, y, w, h } = paint.selector.payload;
      const box = document.createElement("div");
      box.className = "xa-region";
      box.dataset.selectorId = paint.selector.id;
      box.style.position = "absolute";
      box.style.left = `${x * 100}%`;
      box.style.top = `${y * 100}%`;
      box.style.width = `${w * 100}%`;
      box.style.height = `${h * 100}%`;
      this.styleHighlight(box, paint.colorIndex);
      this.wireDropTarget(box, paint.selector.id);
      regions.appendChild(box);
    }
  }

  private markFor(paint: PaintableHighlight, textContent: string): HTMLElement {
    const mark = document.createElement("mark");
    mark.className = "xa-hl";
    mark.dataset.selectorId = paint.selector.id;
    mark.textContent = textContent;
    this.styleHighlight(mark, paint.colorIndex);
    this.wireDropTarget(mark, paint.selector.id);
    return mark;
  }

  private styleHighlight(element: HTMLElement, colorIndex: number | null): void {
    if (colorIndex === null) {
      element.classList.add("xa-hl-pending");
    } else {
      element.style.backgroundColor = highlightFill(colorIndex);
      element.style.borderBottom = `2px solid ${paletteColor(colorIndex)}`;
      element.dataset.paletteIndex = String(colorIndex);
    }
  }

  private wireDropTarget(element: HTMLElement, selectorId: string): void {
    element.addEventListener("dragover", (event) => event.preventDefault());
    element.addEventListener("drop", (event) => {
      event.preventDefault();
      const text = (event as DragEvent).dataTransfer?.getData("application/json") ?? "";
      if (text && this.onHighlightDrop) this.onHighlightDrop(selectorId, text);
    });
  }

  /** Map the current browser selection to page/character offsets. */
  selectionToSpan(): TextSpanRef | null {
    const selection = window.getSelection();
    if (!selection || selection.rangeCount === 0 || selection.isCollapsed) return null;
    return this.rangeToSpan(selection.getRangeAt(0));
  }

  rangeToSpan(range: Range): TextSpanRef | null {
    const startPage = this.pageOf(range.startContainer);
    const endPage = this.pageOf(range.endContainer);
    if (startPage === null || startPage !== endPage) return null;
    const body = this.pageBodies[startPage];
    if (!body || !this.source.supportsTextOffsets) return null;
    const charStart = textOffsetWithin(body, range.startContainer, range.startOffset);
    const charEnd = textOffsetWithin(body, range.endContainer, range.endOffset);
    if (charStart === null || charEnd === null || charStart >= charEnd) return null;
    return { pageIndex: startPage, charStart, charEnd };
  }

  private pageOf(node: Node): number | null {
    let current: Node | null = node;
    while (current) {
      if (current instanceof HTMLElement && current.classList.contains("xa-page")) {
        return Number(current.dataset.pageIndex);
      }
      current = current.parentNode;
    }
    return null;
  }

  measureAnchors(selectorIds: string[], measurer: Measurer): AnchorBoxInput[] {
    const boxes: AnchorBoxInput[] = [];
    for (const selectorId of selectorIds) {
      const box = measurer.anchorBox(selectorId);
      if (!box) continue;
      const element = this.column.querySelector(`[data-selector-id="${selectorId}"]`);
      const page = element ? this.pageOf(element) : null;
      boxes.push({ selector_id: selectorId, page_index: page ?? 0, ...box });
    }
    return boxes;
  }
}

/** Character offset of (node, offset) within root's concatenated text. */
export function textOffsetWithin(root: Node, node: Node, offset: number): number | null {
  if (node !== root && !root.contains(node)) return null;
  const document = root.ownerDocument;
  if (!document) return null;
  const range = document.createRange();
  range.selectNodeContents(root);
  try {
    range.setEnd(node, offset);
  } catch {
    return null;
  }
  return range.cloneContents().textContent?.length ?? 0;
}
