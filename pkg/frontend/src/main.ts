// Entry point: route /d/{dashboard}, /s/{snapshot}, and the dashboard list.

import { ApiClient } from "./api.js";
import { DashboardPage } from "./dashboard.js";
import { renderSnapshot } from "./snapshot.js";
import { parseViewState } from "./state.js";
import { DEFAULT_RANGE } from "./time.js";

async function renderIndex(root: HTMLElement, client: ApiClient): Promise<void> {
  const { dashboards } = await client.listDashboards();
  root.replaceChildren();
  const title = document.createElement("h2");
  title.textContent = "Dashboards";
  root.appendChild(title);
  if (dashboards.length === 0) {
    const hint = document.createElement("p");
    hint.textContent =
      "No dashboards yet. POST one to /api/v1/dashboards, then reload.";
    root.appendChild(hint);
    return;
  }
  const list = document.createElement("ul");
  list.className = "dashboard-list";
  for (const dashboard of dashboards) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = `/d/${encodeURIComponent(dashboard.id)}`;
    link.textContent = dashboard.title || dashboard.id;
    item.appendChild(link);
    list.appendChild(item);
  }
  root.appendChild(list);
}

export async function route(root: HTMLElement, client: ApiClient): Promise<void> {
  const path = location.pathname;
  const snapshotMatch = /^\/s\/([^/?]+)/.exec(path);
  try {
    if (snapshotMatch) {
      const doc = await client.snapshot(decodeURIComponent(snapshotMatch[1]));
      renderSnapshot(root, doc);
      return;
    }
    const state = parseViewState(path, location.search);
    if (state) {
      if (!state.range.from) state.range = { ...DEFAULT_RANGE };
      const page = new DashboardPage(root, client, state);
      await page.load();
      return;
    }
    await renderIndex(root, client);
  } catch (error) {
    root.replaceChildren();
    const report = document.createElement("p");
    report.className = "page-error";
    report.textContent = error instanceof Error ? error.message : String(error);
    root.appendChild(report);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void route(document.getElementById("app") as HTMLElement, new ApiClient());
}
