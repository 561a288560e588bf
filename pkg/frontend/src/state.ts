/**
 * Reader view state.
 *
 * Holds what is currently open and rendered: the document, zoom, the side
 * panel contents, the single pending (not-yet-linked) highlight, and the
 * service outputs the view was last painted from. The state never derives
 * colors or placements; it only stores what the service returned.
 */

import type { AnnotationBundle, SelectorPayload, WidgetPlacement } from "./types";

export interface PanelWebPage {
  kind: "web_page";
  locator: string;
  title: string;
  paragraphs: { quote: string; elementPath: string | null }[];
}

export interface PanelVideo {
  kind: "video";
  locator: string;
  title: string;
  durationMs: number;
  segments: { startMs: number; endMs: number; label: string }[];
}

export interface PanelPdf {
  kind: "pdf_document";
  locator: string;
  title: string;
  fragments: { label: string; payload: SelectorPayload }[];
}

export type PanelItem = PanelWebPage | PanelVideo | PanelPdf;

export interface PendingSelection {
  selectorId: string;
  pageIndex: number;
  charStart: number;
  charEnd: number;
}

type Listener = () => void;

export class ViewState {
  documentId: string | null = null;
  zoom = 1.0;
  /** web pages and videos on the left, external PDFs on the right */
  leftPanel: PanelItem[] = [];
  rightPanel: PanelItem[] = [];

  private pending: PendingSelection | null = null;
  bundle: AnnotationBundle | null = null;
  placements: WidgetPlacement[] = [];

  private listeners: Listener[] = [];

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  notify(): void {
    for (const listener of this.listeners) listener();
  }

  get pendingSelection(): PendingSelection | null {
    return this.pending;
  }

  /** At most one pending selection: setting a new one replaces the old. */
  setPendingSelection(selection: PendingSelection | null): void {
    this.pending = selection;
    this.notify();
  }

  /** Once a pending highlight gains its first link it is no longer pending. */
  resolvePendingIfLinked(): void {
    if (this.pending && this.bundle) {
      const linked = this.bundle.highlights.some((h) => h.id === this.pending!.selectorId);
      if (linked) this.pending = null;
    }
  }

  setView(bundle: AnnotationBundle, placements: WidgetPlacement[]): void {
    this.bundle = bundle;
    this.placements = placements;
    this.resolvePendingIfLinked();
    this.notify();
  }
}
