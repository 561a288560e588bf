/**
 * Side panels for external materials: web pages and videos on the left,
 * other PDF documents on the right.
 *
 * The panels stand in for external desktop applications: selecting a
 * fragment in a panel produces a capture payload (the same message a real
 * browser or video-player plug-in would send), which becomes the target of
 * a drag-and-drop link.
 */

import type { PanelItem } from "./state";
import type { CapturePayload } from "./types";

export const CAPTURE_MIME = "application/json";

export function capturesFor(item: PanelItem): { label: string; payload: CapturePayload }[] {
  switch (item.kind) {
    case "web_page":
      return item.paragraphs.map((paragraph) => ({
        label: paragraph.quote,
        payload: {
          source_app: "reader-web-panel",
          resource: { kind: "web_page", locator: item.locator, title: item.title },
          selection: {
            kind: "web_fragment",
            exact_quote: paragraph.quote,
            prefix: "",
            suffix: "",
            element_path: paragraph.elementPath,
          },
        },
      }));
    case "video":
      return item.segments.map((segment) => ({
        label: segment.label,
        payload: {
          source_app: "reader-video-panel",
          resource: { kind: "video", locator: item.locator, title: item.title },
          selection: {
            kind: "time_segment",
            start_ms: segment.startMs,
            end_ms: segment.endMs,
          },
        },
      }));
    case "pdf_document":
      return item.fragments.map((fragment) => ({
        label: fragment.label,
        payload: {
          source_app: "reader-pdf-panel",
          resource: { kind: "pdf_document", locator: item.locator, title: item.title },
          selection: fragment.payload,
        },
      }));
  }
}

export class SidePanel {
  readonly element: HTMLElement;

  constructor(host: HTMLElement, side: "left" | "right", title: string) {
    this.element = document.createElement("aside");
    this.element.className = `xa-panel xa-panel-${side}`;
    const heading = document.createElement("h2");
    heading.textContent = title;
    this.element.appendChild(heading);
    host.appendChild(this.element);
  }

  render(items: PanelItem[]): void {
    this.element.querySelectorAll(".xa-panel-item").forEach((node) => node.remove());
    for (const item of items) {
      const block = document.createElement("section");
      block.className = "xa-panel-item";
      const caption = document.createElement("h3");
      caption.textContent = item.title;
      block.appendChild(caption);

      for (const capture of capturesFor(item)) {
        const chip = document.createElement("div");
        chip.className = "xa-chip";
        chip.dataset.selectionKind = capture.payload.selection.kind;
        chip.draggable = true;
        chip.textContent = capture.label;
        chip.addEventListener("dragstart", (event) => {
          (event as DragEvent).dataTransfer?.setData(
            CAPTURE_MIME,
            JSON.stringify(capture.payload),
          );
        });
        block.appendChild(chip);
      }
      this.element.appendChild(block);
    }
  }
}
