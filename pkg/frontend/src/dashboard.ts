// Dashboard page: global time picker, template variables, panel grid,
// drag-to-annotate flow, and snapshot sharing. All state round-trips through
// the URL so a reload reconstructs the view.

import { ApiClient } from "./api.js";
import { DragRange } from "./chart.js";
import { Panel } from "./panel.js";
import { resolveSelections, ViewState, viewStateToUrl } from "./state.js";
import { PRESETS, TimeRange } from "./time.js";
import { AlertEventDoc, AnnotationDoc, DashboardDoc } from "./types.js";

export class DashboardPage {
  doc: DashboardDoc | null = null;
  panels: Panel[] = [];
  private options: Record<string, string[]> = {};
  private refreshTimer: ReturnType<typeof setInterval> | null = null;
  private annotationDraft: { panel: Panel; range: DragRange } | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    public state: ViewState,
  ) {}

  async load(): Promise<void> {
    const response = await this.client.dashboard(this.state.dashboardId);
    this.doc = response.dashboard;
    this.options = response.variable_options;
    this.state.variables = resolveSelections(this.state.variables, this.options);
    if (!this.state.range.from) {
      this.state.range = { ...this.doc.default_time_range } as TimeRange;
    }
    this.renderShell();
    await this.refresh();
  }

  private syncUrl(): void {
    history.replaceState(null, "", viewStateToUrl(this.state));
  }

  private renderShell(): void {
    if (!this.doc) return;
    this.root.replaceChildren();

    const header = document.createElement("header");
    header.className = "toolbar";

    const title = document.createElement("h2");
    title.textContent = this.doc.title;
    header.appendChild(title);

    for (const variable of this.doc.variables) {
      const label = document.createElement("label");
      label.className = "variable-picker";
      label.textContent = `${variable.name}: `;
      const select = document.createElement("select");
      select.dataset.variable = variable.name;
      for (const option of this.options[variable.name] ?? []) {
        const el = document.createElement("option");
        el.value = option;
        el.textContent = option;
        el.selected = this.state.variables[variable.name] === option;
        select.appendChild(el);
      }
      select.addEventListener("change", () => {
        void this.selectVariable(variable.name, select.value);
      });
      label.appendChild(select);
      header.appendChild(label);
    }

    const picker = document.createElement("select");
    picker.className = "time-picker";
    for (const preset of PRESETS) {
      const option = document.createElement("option");
      option.value = preset.from;
      option.textContent = preset.label;
      option.selected = this.state.range.from === preset.from;
      picker.appendChild(option);
    }
    if (!PRESETS.some((p) => p.from === this.state.range.from)) {
      const custom = document.createElement("option");
      custom.value = this.state.range.from;
      custom.textContent = `${this.state.range.from} → ${this.state.range.to}`;
      custom.selected = true;
      picker.appendChild(custom);
    }
    picker.addEventListener("change", () => {
      void this.setTimeRange({ from: picker.value, to: "now" });
    });
    header.appendChild(picker);

    const refreshPicker = document.createElement("select");
    refreshPicker.className = "refresh-picker";
    for (const seconds of [0, 5, 30, 60]) {
      const option = document.createElement("option");
      option.value = String(seconds);
      option.textContent = seconds === 0 ? "manual refresh" : `every ${seconds}s`;
      option.selected = this.state.refreshSec === seconds;
      refreshPicker.appendChild(option);
    }
    refreshPicker.addEventListener("change", () => {
      this.setRefreshInterval(Number(refreshPicker.value));
    });
    header.appendChild(refreshPicker);

    const refreshButton = document.createElement("button");
    refreshButton.className = "refresh-button";
    refreshButton.textContent = "refresh";
    refreshButton.addEventListener("click", () => void this.refresh());
    header.appendChild(refreshButton);

    const share = document.createElement("button");
    share.className = "share-button";
    share.textContent = "share snapshot";
    share.addEventListener("click", () => void this.shareSnapshot());
    header.appendChild(share);

    const shareTarget = document.createElement("span");
    shareTarget.className = "share-url";
    header.appendChild(shareTarget);

    this.root.appendChild(header);

    const grid = document.createElement("main");
    grid.className = "panel-grid";
    this.panels = (this.doc.panels ?? []).map(
      (panelDoc) =>
        new Panel(panelDoc, this.client, (panel, range) =>
          this.beginAnnotation(panel, range),
        ),
    );
    for (const panel of this.panels) {
      grid.appendChild(panel.root);
    }
    this.root.appendChild(grid);
    this.applyRefreshTimer();
  }

  async refresh(): Promise<void> {
    if (!this.doc) return;
    const { from, to } = this.state.range;
    const measurements = [...new Set(this.panels.map((p) => p.measurement))];
    const annotations: AnnotationDoc[] = [];
    const alerts: AlertEventDoc[] = [];
    for (const measurement of measurements) {
      try {
        annotations.push(...(await this.client.annotations(from, to, measurement)));
        alerts.push(
          ...(await this.client.alerts({ measurement, start: from, end: to })),
        );
      } catch {
        // overlays are best-effort; panels still render their series
      }
    }
    await Promise.all(
      this.panels.map((panel) =>
        panel.refresh(this.state.range, this.state.variables, annotations, alerts),
      ),
    );
  }

  async setTimeRange(range: TimeRange): Promise<void> {
    this.state.range = range;
    this.syncUrl();
    await this.refresh();
  }

  async selectVariable(name: string, value: string): Promise<void> {
    if (!(this.options[name] ?? []).includes(value)) return;
    this.state.variables[name] = value;
    this.syncUrl();
    await this.refresh();
  }

  setRefreshInterval(seconds: number): void {
    this.state.refreshSec = seconds;
    this.syncUrl();
    this.applyRefreshTimer();
  }

  private applyRefreshTimer(): void {
    if (this.refreshTimer !== null) {
      clearInterval(this.refreshTimer);
      this.refreshTimer = null;
    }
    if (this.state.refreshSec > 0) {
      this.refreshTimer = setInterval(
        () => void this.refresh(),
        this.state.refreshSec * 1000,
      );
    }
  }

  // -- annotation flow ----------------------------------------------------

  beginAnnotation(panel: Panel, range: DragRange): void {
    this.cancelAnnotation();
    this.annotationDraft = { panel, range };
    const form = document.createElement("form");
    form.className = "annotation-form";

    const kind = document.createElement("select");
    kind.className = "annotation-kind";
    for (const value of ["false_positive", "note"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      kind.appendChild(option);
    }
    form.appendChild(kind);

    const text = document.createElement("input");
    text.className = "annotation-text";
    text.placeholder = "why is this expected?";
    form.appendChild(text);

    const save = document.createElement("button");
    save.type = "submit";
    save.textContent = "save";
    form.appendChild(save);

    const cancel = document.createElement("button");
    cancel.type = "button";
    cancel.className = "annotation-cancel";
    cancel.textContent = "cancel";
    cancel.addEventListener("click", () => this.cancelAnnotation());
    form.appendChild(cancel);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitAnnotation(
        kind.value as "false_positive" | "note",
        text.value,
      );
    });
    panel.root.appendChild(form);
  }

  cancelAnnotation(): void {
    this.annotationDraft = null;
    this.root.querySelector(".annotation-form")?.remove();
  }

  async submitAnnotation(kind: "false_positive" | "note", text: string): Promise<void> {
    const draft = this.annotationDraft;
    if (!draft) return;
    const form = this.root.querySelector(".annotation-form");
    try {
      await this.client.createAnnotation({
        measurement: draft.panel.measurement,
        tags: { ...draft.panel.resolvedTags },
        start_ns: draft.range.startNs,
        end_ns: draft.range.endNs,
        kind,
        text,
      });
    } catch (error) {
      // surface inline and keep the draft for correction
      let report = form?.querySelector(".annotation-error");
      if (!report && form) {
        report = document.createElement("p");
        report.className = "annotation-error";
        form.appendChild(report);
      }
      if (report) {
        report.textContent = error instanceof Error ? error.message : String(error);
      }
      return;
    }
    this.annotationDraft = null;
    form?.remove();
    await this.refresh(); // region renders; covered alert markers flip style
  }

  // -- snapshot sharing -----------------------------------------------------

  async shareSnapshot(): Promise<string | null> {
    if (!this.doc) return null;
    const target = this.root.querySelector(".share-url");
    try {
      const created = await this.client.createSnapshot({
        dashboard_id: this.doc.id,
        start: this.state.range.from,
        end: this.state.range.to,
        variables: { ...this.state.variables },
      });
      const url = `/s/${created.id}`;
      if (target) {
        target.replaceChildren();
        const link = document.createElement("a");
        link.href = url;
        link.textContent = url;
        target.appendChild(link);
      }
      return url;
    } catch (error) {
      if (target) {
        target.textContent =
          "snapshot failed: " +
          (error instanceof Error ? error.message : String(error));
      }
      return null;
    }
  }
}
