// Thin client over the documented /api/v1 endpoints. Every issued request
// URL lands in `log` so behavior stays observable in tests and debugging.

import {
  AlertEventDoc,
  AnnotationDoc,
  DashboardResponse,
  QueryResponse,
  SnapshotDoc,
} from "./types.js";

export interface QueryParams {
  measurement: string;
  start: string;
  end: string;
  tags?: Record<string, string>;
  groupBy?: string[];
  aggregate?: string;
  bucketNs?: number | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  readonly log: string[] = [];

  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, url: string, body?: unknown): Promise<T> {
    this.log.push(`${method} ${url}`);
    const response = await fetch(this.base + url, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await response.text();
    let doc: unknown = null;
    try {
      doc = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(response.status, `malformed response from ${url}`);
    }
    if (!response.ok) {
      const message =
        doc && typeof doc === "object" && "error" in doc
          ? String((doc as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return doc as T;
  }

  queryUrl(params: QueryParams): string {
    const search = new URLSearchParams();
    search.set("measurement", params.measurement);
    search.set("start", params.start);
    search.set("end", params.end);
    for (const [key, value] of Object.entries(params.tags ?? {})) {
      search.set(`tag.${key}`, value);
    }
    if (params.groupBy && params.groupBy.length > 0) {
      search.set("group_by", params.groupBy.join(","));
    }
    if (params.aggregate && params.aggregate !== "none") {
      search.set("aggregate", params.aggregate);
      if (params.bucketNs) search.set("bucket_ns", String(params.bucketNs));
    }
    return `/api/v1/query?${search.toString()}`;
  }

  query(params: QueryParams): Promise<QueryResponse> {
    return this.request<QueryResponse>("GET", this.queryUrl(params));
  }

  dashboard(id: string): Promise<DashboardResponse> {
    return this.request<DashboardResponse>(
      "GET",
      `/api/v1/dashboards?id=${encodeURIComponent(id)}`,
    );
  }

  listDashboards(): Promise<{ dashboards: { id: string; title: string }[] }> {
    return this.request("GET", "/api/v1/dashboards");
  }

  annotations(start: string, end: string, measurement?: string): Promise<AnnotationDoc[]> {
    const search = new URLSearchParams({ start, end });
    if (measurement) search.set("measurement", measurement);
    return this.request<{ annotations: AnnotationDoc[] }>(
      "GET",
      `/api/v1/annotations?${search.toString()}`,
    ).then((doc) => doc.annotations);
  }

  createAnnotation(annotation: AnnotationDoc): Promise<AnnotationDoc> {
    return this.request<{ annotation: AnnotationDoc }>(
      "POST",
      "/api/v1/annotations",
      annotation,
    ).then((doc) => doc.annotation);
  }

  alerts(params: {
    measurement: string;
    start: string;
    end: string;
    suppressed?: boolean;
  }): Promise<AlertEventDoc[]> {
    const search = new URLSearchParams({
      measurement: params.measurement,
      start: params.start,
      end: params.end,
    });
    if (params.suppressed !== undefined) {
      search.set("suppressed", String(params.suppressed));
    }
    return this.request<{ events: AlertEventDoc[] }>(
      "GET",
      `/api/v1/alerts?${search.toString()}`,
    ).then((doc) => doc.events);
  }

  createSnapshot(body: {
    dashboard_id: string;
    start: string;
    end: string;
    variables: Record<string, string>;
  }): Promise<{ id: string; url: string }> {
    return this.request("POST", "/api/v1/snapshots", body);
  }

  snapshot(id: string): Promise<SnapshotDoc> {
    return this.request<SnapshotDoc>(
      "GET",
      `/api/v1/snapshots/${encodeURIComponent(id)}`,
    );
  }
}
