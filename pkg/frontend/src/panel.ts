// One dashboard panel: resolves its query template against the current
// variable selections and time range, fetches through the API client, and
// renders a chart, table, or stat. Failures stay local to the panel.

import { ApiClient } from "./api.js";
import { DragRange, renderChart } from "./chart.js";
import { substituteVariables } from "./state.js";
import { formatTimestamp, resolveNs, TimeRange } from "./time.js";
import { AlertEventDoc, AnnotationDoc, PanelDoc, SeriesDoc } from "./types.js";

export class Panel {
  readonly root: HTMLElement;
  private readonly body: HTMLElement;
  private seq = 0;
  resolvedTags: Record<string, string> = {};

  constructor(
    readonly doc: PanelDoc,
    private readonly client: ApiClient,
    private readonly onDragSelect?: (panel: Panel, range: DragRange) => void,
  ) {
    this.root = document.createElement("section");
    this.root.className = "panel";
    this.root.dataset.panelId = doc.id;
    const title = document.createElement("h3");
    title.className = "panel-title";
    title.textContent = doc.title;
    this.root.appendChild(title);
    this.body = document.createElement("div");
    this.body.className = "panel-body";
    this.root.appendChild(this.body);
  }

  get measurement(): string {
    return this.doc.query.measurement;
  }

  async refresh(
    range: TimeRange,
    selections: Record<string, string>,
    annotations: AnnotationDoc[],
    alerts: AlertEventDoc[],
  ): Promise<void> {
    const seq = ++this.seq;
    try {
      this.resolvedTags = substituteVariables(this.doc.query.tags ?? {}, selections);
      const response = await this.client.query({
        measurement: this.doc.query.measurement,
        start: range.from,
        end: range.to,
        tags: this.resolvedTags,
        groupBy: this.doc.query.group_by,
        aggregate: this.doc.query.aggregate,
        bucketNs: this.doc.query.bucket_ns,
      });
      if (seq !== this.seq) return; // a newer request superseded this one
      this.render(response.series, range, annotations, alerts);
    } catch (error) {
      if (seq !== this.seq) return;
      this.renderError(error instanceof Error ? error.message : String(error));
    }
  }

  private relevantAnnotations(annotations: AnnotationDoc[]): AnnotationDoc[] {
    return annotations.filter(
      (a) =>
        a.measurement === this.doc.query.measurement &&
        Object.entries(a.tags).every(
          ([key, value]) =>
            !(key in this.resolvedTags) || this.resolvedTags[key] === value,
        ),
    );
  }

  private relevantAlerts(alerts: AlertEventDoc[]): AlertEventDoc[] {
    return alerts.filter(
      (event) =>
        event.measurement === this.doc.query.measurement &&
        Object.entries(this.resolvedTags).every(
          ([key, value]) => event.tags[key] === value,
        ),
    );
  }

  render(
    series: SeriesDoc[],
    range: TimeRange,
    annotations: AnnotationDoc[],
    alerts: AlertEventDoc[],
  ): void {
    this.body.replaceChildren();
    if (series.every((s) => s.points.length === 0)) {
      const empty = document.createElement("p");
      empty.className = "panel-empty";
      empty.textContent = "no data";
      this.body.appendChild(empty);
      return;
    }
    if (this.doc.display === "stat") {
      this.renderStat(series);
      return;
    }
    if (this.doc.display === "table") {
      this.renderTable(series);
      return;
    }
    const nowNs = Date.now() * 1e6;
    const svg = renderChart({
      series,
      annotations: this.relevantAnnotations(annotations),
      alerts: this.relevantAlerts(alerts),
      startNs: resolveNs(range.from, nowNs),
      endNs: resolveNs(range.to, nowNs),
      onDragSelect: this.onDragSelect
        ? (dragRange) => this.onDragSelect?.(this, dragRange)
        : undefined,
    });
    this.body.appendChild(svg);
    const legend = document.createElement("div");
    legend.className = "panel-legend";
    for (const line of svg.querySelectorAll(".series-line")) {
      const item = document.createElement("span");
      item.className = "legend-item";
      item.textContent = line.getAttribute("data-legend") ?? "";
      legend.appendChild(item);
    }
    this.body.appendChild(legend);
  }

  private renderStat(series: SeriesDoc[]): void {
    const points = series[0]?.points ?? [];
    const last = points[points.length - 1];
    const stat = document.createElement("p");
    stat.className = "panel-stat";
    stat.textContent = last ? last[1].toPrecision(6) : "no data";
    this.body.appendChild(stat);
  }

  private renderTable(series: SeriesDoc[]): void {
    const table = document.createElement("table");
    table.className = "panel-table";
    const head = table.createTHead().insertRow();
    for (const column of ["series", "time", "value"]) {
      const th = document.createElement("th");
      th.textContent = column;
      head.appendChild(th);
    }
    const tbody = table.createTBody();
    for (const s of series) {
      for (const [ts, value] of s.points) {
        const row = tbody.insertRow();
        row.insertCell().textContent = Object.entries(s.tags)
          .map(([k, v]) => `${k}=${v}`)
          .join(",");
        row.insertCell().textContent = formatTimestamp(ts);
        row.insertCell().textContent = String(value);
      }
    }
    this.body.appendChild(table);
  }

  renderError(message: string): void {
    this.body.replaceChildren();
    const error = document.createElement("p");
    error.className = "panel-error";
    error.textContent = `query failed: ${message}`;
    this.body.appendChild(error);
  }
}
