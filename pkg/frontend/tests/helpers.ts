import scenarioFixture from "./fixtures/scenario.json";
import type { AnnotationBundle, WidgetPlacement } from "../src/types";
import type { Measurer } from "../src/viewer";

export interface ScenarioFixture {
  ids: {
    document_id: string;
    highlight_id: string;
    comment_id: string;
    captures: Record<string, { resource_id: string; selector_id: string }>;
    links: Record<string, string>;
  };
  bundle: AnnotationBundle;
  layout_request: {
    anchors: { selector_id: string; x: number; y: number; w: number; h: number }[];
    margins: { page_bottom: number };
  };
  placements: WidgetPlacement[];
}

export const fixture = scenarioFixture as unknown as ScenarioFixture;

/** jsdom has no layout engine; tests measure synthetically instead. */
export class SyntheticMeasurer implements Measurer {
  private readonly boxes = new Map<string, { x: number; y: number; w: number; h: number }>();
  private next = 100;

  constructor(
    private readonly bottom: number = 2400,
    private readonly auto: boolean = true,
  ) {}

  place(selectorId: string, box: { x: number; y: number; w: number; h: number }): void {
    this.boxes.set(selectorId, box);
  }

  anchorBox(selectorId: string) {
    const known = this.boxes.get(selectorId);
    if (known || !this.auto) return known ?? null;
    // unseen highlights get successive rows, like stacked lines of text
    const box = { x: 500, y: (this.next += 40), w: 120, h: 16 };
    this.boxes.set(selectorId, box);
    return box;
  }

  pageBottom(): number {
    return this.bottom;
  }
}

export function rgb(hex: string): string {
  const value = hex.replace("#", "");
  const channels = [0, 2, 4].map((i) => parseInt(value.slice(i, i + 2), 16));
  return `rgb(${channels.join(", ")})`;
}
