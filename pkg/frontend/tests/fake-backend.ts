// In-memory stand-in for the /api/v1 service, mirroring the documented
// contract (query partitioning, annotation suppression of alerts, snapshot
// materialization) closely enough to drive the UI in jsdom.

import { AlertEventDoc, AnnotationDoc, DashboardDoc, SeriesDoc } from "../src/types.js";

interface RawPoint {
  measurement: string;
  tags: Record<string, string>;
  field: string;
  ts: number;
  value: number;
}

interface StoredAlert {
  measurement: string;
  tags: Record<string, string>;
  field: string;
  timestamp_ns: number;
  baseline: number;
  observed: number;
  rel_change: number;
  threshold_used: number;
  kind: "regression" | "improvement";
}

const UNIT_NS: Record<string, number> = { s: 1e9, m: 60e9, h: 3600e9, d: 86400e9 };

function resolveTime(value: string, nowNs: number): number {
  const match = /^now(-(\d+)([smhd]))?$/.exec(value);
  if (match) return match[1] ? nowNs - Number(match[2]) * UNIT_NS[match[3]] : nowNs;
  return Number(value);
}

export class FakeBackend {
  points: RawPoint[] = [];
  annotations: AnnotationDoc[] = [];
  alertsStored: StoredAlert[] = [];
  dashboards = new Map<string, DashboardDoc>();
  snapshots = new Map<string, string>(); // id -> frozen JSON text
  nextAnnotationId = 1;
  nextSnapshotId = 1;
  requests: string[] = [];

  addSeries(
    measurement: string,
    tags: Record<string, string>,
    field: string,
    points: [number, number][],
  ): void {
    for (const [ts, value] of points) {
      this.points.push({ measurement, tags, field, ts, value });
    }
  }

  private query(params: URLSearchParams): { series: SeriesDoc[] } {
    const nowNs = Date.now() * 1e6;
    const measurement = params.get("measurement") ?? "";
    const start = resolveTime(params.get("start") ?? "0", nowNs);
    const end = resolveTime(params.get("end") ?? "now", nowNs);
    const groupBy = (params.get("group_by") ?? "").split(",").filter(Boolean);
    const filters: Record<string, string> = {};
    for (const [key, value] of params) {
      if (key.startsWith("tag.")) filters[key.slice(4)] = value;
    }
    const partitions = new Map<string, { tags: Record<string, string>; pts: [number, number][] }>();
    for (const point of this.points) {
      if (point.measurement !== measurement) continue;
      if (!Object.entries(filters).every(([k, v]) => point.tags[k] === v)) continue;
      if (!(start < point.ts && point.ts <= end)) continue;
      const tags: Record<string, string> = { _field: point.field };
      for (const key of groupBy) tags[key] = point.tags[key] ?? "";
      const partitionKey = JSON.stringify(Object.entries(tags).sort());
      const partition = partitions.get(partitionKey) ?? { tags, pts: [] };
      partition.pts.push([point.ts, point.value]);
      partitions.set(partitionKey, partition);
    }
    const series = [...partitions.values()].map((p) => ({
      measurement,
      tags: p.tags,
      points: p.pts.sort((a, b) => a[0] - b[0] || a[1] - b[1]),
    }));
    return { series };
  }

  private suppressedBy(event: StoredAlert): boolean {
    return this.annotations.some(
      (a) =>
        a.kind === "false_positive" &&
        a.measurement === event.measurement &&
        Object.entries(a.tags).every(([k, v]) => event.tags[k] === v) &&
        a.start_ns <= event.timestamp_ns &&
        event.timestamp_ns <= a.end_ns,
    );
  }

  private alerts(params: URLSearchParams): { events: AlertEventDoc[] } {
    const measurement = params.get("measurement") ?? "benchmark";
    const wanted = params.get("suppressed");
    const events = this.alertsStored
      .filter((e) => e.measurement === measurement)
      .map((e) => ({ ...e, suppressed: this.suppressedBy(e) }))
      .filter((e) => wanted === null || String(e.suppressed) === wanted);
    return { events };
  }

  private materializeSnapshot(body: {
    dashboard_id: string;
    start: string;
    end: string;
    variables: Record<string, string>;
  }): { status: number; doc: unknown } {
    const dashboard = this.dashboards.get(body.dashboard_id);
    if (!dashboard) return { status: 404, doc: { error: "no such dashboard" } };
    const nowNs = Date.now() * 1e6;
    const startNs = resolveTime(body.start, nowNs);
    const endNs = resolveTime(body.end, nowNs);
    const panels = dashboard.panels.map((panel) => {
      const params = new URLSearchParams({
        measurement: panel.query.measurement,
        start: String(startNs),
        end: String(endNs),
      });
      for (const [key, value] of Object.entries(panel.query.tags ?? {})) {
        params.set(
          `tag.${key}`,
          value.startsWith("$") ? body.variables[value.slice(1)] ?? "" : value,
        );
      }
      if (panel.query.group_by?.length) {
        params.set("group_by", panel.query.group_by.join(","));
      }
      return {
        panel_id: panel.id,
        title: panel.title,
        display: panel.display,
        series: this.query(params).series,
      };
    });
    const id = `snap${this.nextSnapshotId++}`;
    const doc = {
      schema_version: "1",
      id,
      created_ns: nowNs,
      dashboard,
      time_range: { start_ns: startNs, end_ns: endNs },
      variables: body.variables,
      panels,
    };
    this.snapshots.set(id, JSON.stringify(doc));
    return { status: 200, doc: { id, url: `/api/v1/snapshots/${id}` } };
  }

  private variableOptions(dashboard: DashboardDoc): Record<string, string[]> {
    const options: Record<string, string[]> = {};
    for (const variable of dashboard.variables) {
      const values = new Set<string>();
      for (const point of this.points) {
        if (point.measurement !== variable.measurement) continue;
        const value = point.tags[variable.tag_key];
        if (value !== undefined) values.add(value);
      }
      options[variable.name] = [...values].sort();
    }
    return options;
  }

  /** Fetch-compatible handler; install with vi.stubGlobal("fetch", ...). */
  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = typeof input === "string" ? input : input.toString();
    const method = init?.method ?? "GET";
    this.requests.push(`${method} ${url}`);
    const parsed = new URL(url, "http://testhost");
    const params = parsed.searchParams;
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    const json = (status: number, doc: unknown) =>
      new Response(JSON.stringify(doc), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (parsed.pathname === "/api/v1/query" && method === "GET") {
      return json(200, { schema_version: "1", ...this.query(params) });
    }
    if (parsed.pathname === "/api/v1/alerts" && method === "GET") {
      return json(200, { schema_version: "1", ...this.alerts(params) });
    }
    if (parsed.pathname === "/api/v1/annotations") {
      if (method === "POST") {
        if (body.start_ns > body.end_ns) {
          return json(400, { error: "annotation range inverted" });
        }
        const annotation = { ...body, id: this.nextAnnotationId++, created_ns: 1 };
        this.annotations.push(annotation);
        return json(200, { schema_version: "1", annotation });
      }
      if (method === "GET") {
        const nowNs = Date.now() * 1e6;
        const start = resolveTime(params.get("start") ?? "0", nowNs);
        const end = resolveTime(params.get("end") ?? "now", nowNs);
        const measurement = params.get("measurement");
        const annotations = this.annotations.filter(
          (a) =>
            (!measurement || a.measurement === measurement) &&
            a.end_ns >= start &&
            a.start_ns <= end,
        );
        return json(200, { schema_version: "1", annotations });
      }
    }
    if (parsed.pathname === "/api/v1/dashboards" && method === "GET") {
      const id = params.get("id");
      if (id === null) {
        return json(200, {
          schema_version: "1",
          dashboards: [...this.dashboards.values()],
        });
      }
      const dashboard = this.dashboards.get(id);
      if (!dashboard) return json(404, { error: `no dashboard with id ${id}` });
      return json(200, {
        schema_version: "1",
        dashboard,
        variable_options: this.variableOptions(dashboard),
      });
    }
    if (parsed.pathname === "/api/v1/snapshots" && method === "POST") {
      const { status, doc } = this.materializeSnapshot(body);
      return json(status, { schema_version: "1", ...(doc as object) });
    }
    const snapshotMatch = /^\/api\/v1\/snapshots\/(.+)$/.exec(parsed.pathname);
    if (snapshotMatch && method === "GET") {
      const frozen = this.snapshots.get(snapshotMatch[1]);
      if (frozen === undefined) return json(404, { error: "no such snapshot" });
      return new Response(frozen, {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    }
    return json(404, { error: `no route for ${method} ${parsed.pathname}` });
  };
}

export const STEP_TS = (index: number): number => (index + 1) * 1_000_000_000;

/** Step fixture mirroring the detector's: 40 points ~100, 20 points ~130. */
export function loadStepFixture(backend: FakeBackend): void {
  const tags = { name: "BM_Step", machine: "m1" };
  const points: [number, number][] = [];
  for (let i = 0; i < 60; i++) {
    points.push([STEP_TS(i), i < 40 ? 100 + (i % 5) * 0.5 : 130 + (i % 5) * 0.5]);
  }
  backend.addSeries("benchmark", tags, "real_time", points);
  backend.alertsStored.push({
    measurement: "benchmark",
    tags,
    field: "real_time",
    timestamp_ns: STEP_TS(40),
    baseline: 101,
    observed: 130,
    rel_change: 0.287,
    threshold_used: 0.1,
    kind: "regression",
  });
}

export function demoDashboard(): DashboardDoc {
  return {
    id: "demo",
    title: "Demo",
    variables: [
      { name: "bench", measurement: "benchmark", tag_key: "name", tags: {} },
    ],
    panels: [
      {
        id: "p1",
        title: "Real time",
        display: "timeseries",
        query: {
          measurement: "benchmark",
          tags: { name: "$bench" },
          group_by: ["machine"],
        },
      },
    ],
    default_time_range: { from: "now-24h", to: "now" },
  };
}
