/**
 * Typed client for the annotation service.
 *
 * Every method maps to one endpoint under /api/v1; service errors surface
 * as ApiError carrying the machine-readable code from the error body.
 */

import type {
  AnchorBoxInput,
  AnchorResolution,
  AnnotationBundle,
  AnnotationClass,
  CapturePayload,
  CaptureResult,
  CleanupReport,
  Endpoint,
  Link,
  MarginGeometry,
  Resource,
  ResourceKind,
  Selector,
  SelectorPayload,
  WidgetInput,
  WidgetPlacement,
} from "./types";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: unknown;

  constructor(code: string, message: string, status: number, details?: unknown) {
    super(`${code}: ${message}`);
    this.code = code;
    this.status = status;
    this.details = details;
  }
}

type FetchLike = typeof fetch;

export class AnnotationServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(serviceUrl: string, fetchImpl: FetchLike = fetch) {
    this.base = serviceUrl.replace(/\/$/, "") + "/api/v1";
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "HttpError";
      let message = `${response.status} ${response.statusText}`;
      let details: unknown;
      try {
        const parsed = (await response.json()) as {
          code?: string;
          message?: string;
          details?: unknown;
        };
        code = parsed.code ?? code;
        message = parsed.message ?? message;
        details = parsed.details;
      } catch {
        // non-JSON error body: keep the HTTP status text
      }
      throw new ApiError(code, message, response.status, details);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; version: string; store_version: number }> {
    return this.request("GET", "/health");
  }

  createResource(spec: {
    kind: ResourceKind;
    locator?: string;
    comment_body?: string;
    title?: string;
    media_type?: string;
  }): Promise<Resource> {
    return this.request("POST", "/resources", spec);
  }

  getResource(id: string): Promise<Resource> {
    return this.request("GET", `/resources/${id}`);
  }

  findResources(locator: string): Promise<Resource[]> {
    return this.request("GET", `/resources?locator=${encodeURIComponent(locator)}`);
  }

  createSelector(resourceId: string, payload: SelectorPayload): Promise<Selector> {
    return this.request("POST", "/selectors", { resource_id: resourceId, payload });
  }

  createLink(spec: {
    sources: Endpoint[];
    targets: Endpoint[];
    annotation_class?: AnnotationClass;
  }): Promise<Link> {
    return this.request("POST", "/links", spec);
  }

  deleteLink(linkId: string): Promise<CleanupReport> {
    return this.request("DELETE", `/links/${linkId}`);
  }

  annotations(documentId: string): Promise<AnnotationBundle> {
    return this.request("GET", `/documents/${documentId}/annotations`);
  }

  backlinks(entityId: string): Promise<Link[]> {
    return this.request("GET", `/entities/${entityId}/backlinks`);
  }

  ingestCapture(payload: CapturePayload): Promise<CaptureResult> {
    return this.request("POST", "/captures", payload);
  }

  layout(
    anchors: AnchorBoxInput[],
    widgets: WidgetInput[],
    margins: MarginGeometry,
    colors: Record<string, number>,
  ): Promise<WidgetPlacement[]> {
    return this.request("POST", "/layout", { anchors, widgets, margins, colors });
  }

  resolveAnchor(
    selector: Omit<import("./types").TextSpanPayload, "kind">,
    snapshot: { page_index: number; text: string },
  ): Promise<AnchorResolution> {
    return this.request("POST", "/anchors/resolve", { selector, snapshot });
  }
}
