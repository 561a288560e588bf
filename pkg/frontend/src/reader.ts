/**
 * Reader controller: wires the viewer, panels, widget layer, view state and
 * the annotation service together.
 *
 * The controller never assigns colors or computes placements: after every
 * mutation it refetches the document bundle and asks the layout endpoint
 * where widgets go, then repaints exactly that. Reloading the page runs the
 * same refresh and therefore reconstructs the identical view.
 */

import { AnnotationServiceClient, ApiError } from "./api";
import { SidePanel } from "./panels";
import type { DocumentSource } from "./sources";
import { ViewState } from "./state";
import type {
  AnchorBoxInput,
  AnnotationBundle,
  CapturePayload,
  MarginGeometry,
  Selector,
  WidgetInput,
} from "./types";
import { DocumentViewer, DomMeasurer, Measurer, ViewerGeometry } from "./viewer";
import { WidgetLayer, widgetSizeFor } from "./widgets";

const CONTEXT_CHARS = 32;

export interface ReaderOptions {
  geometry?: Partial<ViewerGeometry>;
  measurer?: (viewer: DocumentViewer) => Measurer;
  sourceApp?: string;
}

const DEFAULT_GEOMETRY: ViewerGeometry = {
  viewportWidth: 1200,
  marginLeft: 208,
  marginRight: 208,
  gap: 10,
};

export class ReaderApp {
  readonly state = new ViewState();
  readonly geometry: ViewerGeometry;
  viewer: DocumentViewer | null = null;
  widgets: WidgetLayer | null = null;
  leftPanel: SidePanel;
  rightPanel: SidePanel;
  private measurer: Measurer | null = null;
  private readonly makeMeasurer: (viewer: DocumentViewer) => Measurer;
  private source: DocumentSource | null = null;
  private pendingSelector: Selector | null = null;

  constructor(
    readonly root: HTMLElement,
    readonly client: AnnotationServiceClient,
    options: ReaderOptions = {},
  ) {
    this.geometry = { ...DEFAULT_GEOMETRY, ...options.geometry };
    this.makeMeasurer = options.measurer ?? ((viewer) => new DomMeasurer(viewer.column));
    root.classList.add("xa-reader");
    this.leftPanel = new SidePanel(root, "left", "Web & video");
    this.rightPanel = new SidePanel(root, "right", "Other documents");
  }

  get documentId(): string {
    const id = this.state.documentId;
    if (!id) throw new Error("no document open");
    return id;
  }

  /** Open a document: register (or find) its resource, render, refresh. */
  async open(source: DocumentSource): Promise<void> {
    this.source = source;
    const resource = await this.client.createResource({
      kind: "pdf_document",
      locator: source.locator,
      title: source.title,
    });
    this.state.documentId = resource.id;

    const main = document.createElement("main");
    main.className = "xa-main";
    const existing = this.root.querySelector(".xa-main");
    if (existing) existing.replaceWith(main);
    else this.root.insertBefore(main, this.rightPanel.element);

    this.viewer = new DocumentViewer(main, source, this.geometry);
    this.viewer.onHighlightDrop = (selectorId, dataText) => {
      void this.handleDropData(selectorId, dataText);
    };
    await this.viewer.render();
    this.widgets = new WidgetLayer(this.viewer.column);
    this.widgets.onDelete = (linkId) => void this.deleteWidget(linkId);
    this.measurer = this.makeMeasurer(this.viewer);
    await this.refresh();
  }

  setPanels(left: ViewState["leftPanel"], right: ViewState["rightPanel"]): void {
    this.state.leftPanel = left;
    this.state.rightPanel = right;
    this.leftPanel.render(left);
    this.rightPanel.render(right);
  }

  async setZoom(zoom: number): Promise<void> {
    if (!this.viewer) return;
    this.viewer.setZoom(zoom);
    this.state.zoom = this.viewer.zoom;
    await this.viewer.render();
    await this.refresh();
  }

  /** Fetch the bundle and placements, then repaint everything from them. */
  async refresh(): Promise<void> {
    if (!this.viewer || !this.widgets) return;
    const bundle = await this.client.annotations(this.documentId);
    this.dropStalePending(bundle);
    this.viewer.paintHighlights(bundle.highlights, bundle.colors, this.pendingSelector);

    const anchors = this.measureAnchors(bundle);
    const widgetInputs = this.widgetInputs(bundle);
    const placements =
      widgetInputs.length === 0
        ? []
        : await this.client.layout(anchors, widgetInputs, this.margins(), bundle.colors);
    this.widgets.render(bundle, placements);
    this.state.setView(bundle, placements);
  }

  private dropStalePending(bundle: AnnotationBundle): void {
    if (this.pendingSelector && bundle.highlights.some((h) => h.id === this.pendingSelector!.id)) {
      this.pendingSelector = null; // linked now: bundle colors take over
    }
  }

  private margins(): MarginGeometry {
    return {
      side_widths: { left: this.geometry.marginLeft, right: this.geometry.marginRight },
      page_top: 0,
      page_bottom: this.measurer?.pageBottom() ?? 2000,
      gap: this.geometry.gap,
      viewport_width: this.geometry.viewportWidth,
    };
  }

  private measureAnchors(bundle: AnnotationBundle): AnchorBoxInput[] {
    if (!this.viewer || !this.measurer) return [];
    const ids = bundle.highlights.map((h) => h.id);
    return this.viewer.measureAnchors(ids, this.measurer);
  }

  private widgetInputs(bundle: AnnotationBundle): WidgetInput[] {
    const highlightIds = new Set(bundle.highlights.map((h) => h.id));
    const inputs: WidgetInput[] = [];
    for (const link of bundle.links) {
      const anchor = link.sources
        .map((endpoint) => ("selector" in endpoint ? endpoint.selector : null))
        .find((id) => id !== null && highlightIds.has(id));
      if (!anchor) continue; // anchored on the document itself: no margin widget
      inputs.push({ link_id: link.id, anchor_selector_id: anchor, ...widgetSizeFor(bundle, link) });
    }
    return inputs;
  }

  // -- operations ---------------------------------------------------------

  /**
   * Turn the given text range into a highlight selector. The highlight is
   * painted immediately in a provisional style; its palette color arrives
   * with the bundle once the first link lands.
   */
  async highlightRange(pageIndex: number, charStart: number, charEnd: number): Promise<Selector | null> {
    if (!this.source || charStart >= charEnd) return null; // empty selection: no-op
    const text = this.source.pageText(pageIndex);
    const selector = await this.toast(() =>
      this.client.createSelector(this.documentId, {
        kind: "text_span",
        page_index: pageIndex,
        char_start: charStart,
        char_end: charEnd,
        exact_quote: text.slice(charStart, charEnd),
        prefix: text.slice(Math.max(0, charStart - CONTEXT_CHARS), charStart),
        suffix: text.slice(charEnd, charEnd + CONTEXT_CHARS),
      }),
    );
    if (!selector) return null;
    this.pendingSelector = selector;
    this.state.setPendingSelection({
      selectorId: selector.id,
      pageIndex,
      charStart,
      charEnd,
    });
    await this.refresh();
    return selector;
  }

  /** Highlight whatever the browser selection currently covers. */
  async highlightSelection(): Promise<Selector | null> {
    const span = this.viewer?.selectionToSpan();
    if (!span) return null; // empty or cross-page selection: no-op
    return this.highlightRange(span.pageIndex, span.charStart, span.charEnd);
  }

  /** A fragment from a panel was dropped onto a highlight. */
  async dropCapture(capture: CapturePayload, targetSelectorId: string): Promise<void> {
    const done = await this.toast(async () => {
      const captured = await this.client.ingestCapture(capture);
      await this.client.createLink({
        sources: [{ selector: targetSelectorId }],
        targets: [{ selector: captured.selector_id }],
      });
      return true;
    });
    if (done) await this.refresh(); // rejected drops change nothing
  }

  private async handleDropData(selectorId: string, dataText: string): Promise<void> {
    let capture: CapturePayload;
    try {
      capture = JSON.parse(dataText) as CapturePayload;
    } catch {
      return;
    }
    await this.dropCapture(capture, selectorId);
  }

  /** Attach a comment to a highlight. */
  async addComment(highlightSelectorId: string, text: string): Promise<void> {
    if (!text.trim()) return;
    const done = await this.toast(async () => {
      const comment = await this.client.createResource({
        kind: "comment",
        comment_body: text,
      });
      await this.client.createLink({
        sources: [{ selector: highlightSelectorId }],
        targets: [{ resource: comment.id }],
        annotation_class: "comment",
      });
      return true;
    });
    if (done) await this.refresh();
  }

  /** The (x) control: optimistic removal, rolled back on failure. */
  async deleteWidget(linkId: string): Promise<void> {
    const element = this.widgets?.layer.querySelector(`[data-link-id="${linkId}"]`);
    element?.classList.add("xa-widget-removing");
    try {
      await this.client.deleteLink(linkId);
    } catch (error) {
      element?.classList.remove("xa-widget-removing"); // restore the widget
      this.showToast(error instanceof ApiError ? error.message : String(error));
      return;
    }
    await this.refresh();
  }

  // -- error surfacing -------------------------------------------------------

  private async toast<T>(operation: () => Promise<T>): Promise<T | null> {
    try {
      return await operation();
    } catch (error) {
      this.showToast(error instanceof ApiError ? error.message : String(error));
      return null;
    }
  }

  showToast(message: string): void {
    const toast = document.createElement("div");
    toast.className = "xa-toast";
    toast.textContent = message;
    this.root.appendChild(toast);
    setTimeout(() => toast.remove(), 4000);
  }
}
