// Snapshot page: renders a frozen dashboard purely from the embedded data in
// GET /api/v1/snapshots/{id}. No store queries are issued.

import { ApiClient } from "./api.js";
import { renderChart } from "./chart.js";
import { formatTimestamp } from "./time.js";
import { SnapshotDoc } from "./types.js";

export function renderSnapshot(root: HTMLElement, doc: SnapshotDoc): void {
  root.replaceChildren();
  const header = document.createElement("header");
  header.className = "toolbar";
  const title = document.createElement("h2");
  title.textContent = `${doc.dashboard.title} (snapshot)`;
  header.appendChild(title);
  const meta = document.createElement("span");
  meta.className = "snapshot-meta";
  meta.textContent =
    `frozen at ${formatTimestamp(doc.created_ns)}, range ` +
    `${formatTimestamp(doc.time_range.start_ns)} → ${formatTimestamp(doc.time_range.end_ns)}`;
  header.appendChild(meta);
  root.appendChild(header);

  const grid = document.createElement("main");
  grid.className = "panel-grid";
  for (const panel of doc.panels) {
    const section = document.createElement("section");
    section.className = "panel";
    section.dataset.panelId = panel.panel_id;
    const heading = document.createElement("h3");
    heading.className = "panel-title";
    heading.textContent = panel.title;
    section.appendChild(heading);
    const body = document.createElement("div");
    body.className = "panel-body";
    if (panel.series.every((s) => s.points.length === 0)) {
      const empty = document.createElement("p");
      empty.className = "panel-empty";
      empty.textContent = "no data";
      body.appendChild(empty);
    } else {
      body.appendChild(
        renderChart({
          series: panel.series,
          annotations: [],
          alerts: [],
          startNs: doc.time_range.start_ns,
          endNs: doc.time_range.end_ns,
        }),
      );
    }
    section.appendChild(body);
    grid.appendChild(section);
  }
  root.appendChild(grid);
}

export async function loadSnapshotPage(
  root: HTMLElement,
  client: ApiClient,
  snapshotId: string,
): Promise<void> {
  const doc = await client.snapshot(snapshotId);
  renderSnapshot(root, doc);
}
