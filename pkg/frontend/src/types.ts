/**
 * Interchange vocabulary of the annotation service (/api/v1).
 *
 * Field names match the service's wire format exactly; timestamps are
 * integer epoch milliseconds.
 */

export type ResourceKind =
  | "pdf_document"
  | "web_page"
  | "video"
  | "audio"
  | "image"
  | "comment";

export interface Resource {
  id: string;
  kind: ResourceKind;
  locator: string | null;
  title: string | null;
  media_type: string | null;
  comment_body: string | null;
  created_at: number;
}

export interface TextSpanPayload {
  kind: "text_span";
  page_index: number;
  char_start: number;
  char_end: number;
  exact_quote: string;
  prefix: string;
  suffix: string;
}

export interface PageRegionPayload {
  kind: "page_region";
  page_index: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface TimeSegmentPayload {
  kind: "time_segment";
  start_ms: number;
  end_ms: number;
}

export interface WebFragmentPayload {
  kind: "web_fragment";
  exact_quote: string;
  prefix: string;
  suffix: string;
  element_path: string | null;
}

export type SelectorPayload =
  | TextSpanPayload
  | PageRegionPayload
  | TimeSegmentPayload
  | WebFragmentPayload;

export interface Selector {
  id: string;
  resource_id: string;
  payload: SelectorPayload;
  created_at: number;
}

/** Tagged union: exactly one of the keys is present. */
export type Endpoint = { resource: string } | { selector: string };

export function endpointId(endpoint: Endpoint): string {
  return "resource" in endpoint ? endpoint.resource : endpoint.selector;
}

export type AnnotationClass = "comment" | "explanation" | "example" | "unspecified";
export type Formality = "formal" | "informal" | "unspecified";

export interface Link {
  id: string;
  sources: Endpoint[];
  targets: Endpoint[];
  annotation_class: AnnotationClass;
  formality: Formality;
  created_at: number;
}

export interface AnnotationBundle {
  document: Resource;
  highlights: Selector[];
  links: Link[];
  target_selectors: Selector[];
  target_resources: Resource[];
  colors: Record<string, number>;
}

export interface CleanupReport {
  removed_selectors: string[];
  removed_resources: string[];
}

export interface AnchorBoxInput {
  selector_id: string;
  page_index: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface WidgetInput {
  link_id: string;
  anchor_selector_id: string;
  w: number;
  h: number;
}

export interface MarginGeometry {
  side_widths: { left: number; right: number };
  page_top: number;
  page_bottom: number;
  gap: number;
  viewport_width: number;
}

export interface WidgetPlacement {
  link_id: string;
  anchor_selector_id: string;
  side: "left" | "right";
  x: number;
  y: number;
  w: number;
  h: number;
  palette_index: number;
}

export interface CapturePayload {
  source_app: string;
  resource: {
    kind: Exclude<ResourceKind, "comment">;
    locator: string;
    title?: string;
    media_type?: string;
  };
  selection: SelectorPayload;
  captured_at?: number;
}

export interface CaptureResult {
  resource_id: string;
  selector_id: string;
}

export interface AnchorResolution {
  status: "exact" | "reanchored" | "ambiguous" | "orphaned";
  resolved_start: number | null;
  resolved_end: number | null;
}
