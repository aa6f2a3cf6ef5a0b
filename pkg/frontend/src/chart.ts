// Hand-rolled SVG time-series chart: series polylines with a legend built
// from distinguishing tag values, shaded annotation regions, alert markers,
// and horizontal drag selection for creating annotations.

import { AlertEventDoc, AnnotationDoc, SeriesDoc } from "./types.js";
import { formatTimestamp } from "./time.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const CHART_WIDTH = 800;
export const CHART_HEIGHT = 240;
const PAD_LEFT = 56;
const PAD_RIGHT = 12;
const PAD_TOP = 10;
const PAD_BOTTOM = 22;

const SERIES_COLORS = [
  "#2470c2",
  "#d9a521",
  "#3d9c4e",
  "#c24040",
  "#8453c6",
  "#2aa1a8",
];

export interface ChartScale {
  startNs: number;
  endNs: number;
  min: number;
  max: number;
}

export function timeToX(ts: number, scale: ChartScale): number {
  const span = scale.endNs - scale.startNs || 1;
  const inner = CHART_WIDTH - PAD_LEFT - PAD_RIGHT;
  return PAD_LEFT + ((ts - scale.startNs) / span) * inner;
}

export function xToTime(x: number, scale: ChartScale): number {
  const span = scale.endNs - scale.startNs || 1;
  const inner = CHART_WIDTH - PAD_LEFT - PAD_RIGHT;
  const clamped = Math.min(Math.max(x, PAD_LEFT), CHART_WIDTH - PAD_RIGHT);
  return Math.round(scale.startNs + ((clamped - PAD_LEFT) / inner) * span);
}

export function valueToY(value: number, scale: ChartScale): number {
  const span = scale.max - scale.min || 1;
  const inner = CHART_HEIGHT - PAD_TOP - PAD_BOTTOM;
  return PAD_TOP + (1 - (value - scale.min) / span) * inner;
}

export function computeScale(
  series: SeriesDoc[],
  startNs: number,
  endNs: number,
): ChartScale {
  let min = Infinity;
  let max = -Infinity;
  for (const s of series) {
    for (const [, value] of s.points) {
      if (value < min) min = value;
      if (value > max) max = value;
    }
  }
  if (min === Infinity) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { startNs, endNs, min, max };
}

/** Tag values that differ between series; the legend shows only these. */
export function legendLabel(series: SeriesDoc, all: SeriesDoc[]): string {
  const entries = Object.entries(series.tags).filter(([key, value]) =>
    all.some((other) => other !== series && other.tags[key] !== value),
  );
  const parts = (entries.length > 0 ? entries : Object.entries(series.tags)).map(
    ([key, value]) => `${key}=${value}`,
  );
  return parts.join(" ") || series.measurement;
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

export interface DragRange {
  startNs: number;
  endNs: number;
}

export interface ChartOptions {
  series: SeriesDoc[];
  annotations: AnnotationDoc[];
  alerts: AlertEventDoc[];
  startNs: number;
  endNs: number;
  onDragSelect?: (range: DragRange) => void;
}

export function renderChart(options: ChartOptions): SVGSVGElement {
  const scale = computeScale(options.series, options.startNs, options.endNs);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`,
    width: String(CHART_WIDTH),
    height: String(CHART_HEIGHT),
    class: "chart",
  });

  for (const annotation of options.annotations) {
    const x0 = timeToX(annotation.start_ns, scale);
    const x1 = Math.max(timeToX(annotation.end_ns, scale), x0 + 2);
    const region = svgElement("rect", {
      x: String(x0),
      y: String(PAD_TOP),
      width: String(x1 - x0),
      height: String(CHART_HEIGHT - PAD_TOP - PAD_BOTTOM),
      class: `annotation-region annotation-${annotation.kind}`,
    });
    const title = svgElement("title", {});
    title.textContent = `${annotation.kind}: ${annotation.text}`;
    region.appendChild(title);
    svg.appendChild(region);
  }

  options.series.forEach((series, index) => {
    if (series.points.length === 0) return;
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    const d = series.points
      .map(([ts, value], i) => {
        const x = timeToX(ts, scale).toFixed(2);
        const y = valueToY(value, scale).toFixed(2);
        return `${i === 0 ? "M" : "L"}${x},${y}`;
      })
      .join(" ");
    svg.appendChild(
      svgElement("path", {
        d,
        fill: "none",
        stroke: color,
        "stroke-width": "1.5",
        class: "series-line",
        "data-legend": legendLabel(series, options.series),
      }),
    );
  });

  for (const event of options.alerts) {
    const marker = svgElement("circle", {
      cx: String(timeToX(event.timestamp_ns, scale)),
      cy: String(valueToY(event.observed, scale)),
      r: "5",
      class: `alert-marker alert-${event.kind}${event.suppressed ? " alert-suppressed" : ""}`,
      "data-timestamp": String(event.timestamp_ns),
      "data-suppressed": String(event.suppressed),
    });
    const title = svgElement("title", {});
    title.textContent =
      `${event.kind} ${(event.rel_change * 100).toFixed(1)}% at ` +
      formatTimestamp(event.timestamp_ns);
    marker.appendChild(title);
    svg.appendChild(marker);
  }

  // axis labels: range bounds and value extremes
  const axis = [
    { x: PAD_LEFT, text: formatTimestamp(scale.startNs), anchor: "start" },
    { x: CHART_WIDTH - PAD_RIGHT, text: formatTimestamp(scale.endNs), anchor: "end" },
  ];
  for (const { x, text, anchor } of axis) {
    const label = svgElement("text", {
      x: String(x),
      y: String(CHART_HEIGHT - 6),
      "text-anchor": anchor,
      class: "axis-label",
    });
    label.textContent = text;
    svg.appendChild(label);
  }

  if (options.onDragSelect) {
    attachDragSelect(svg, scale, options.onDragSelect);
  }
  return svg;
}

function attachDragSelect(
  svg: SVGSVGElement,
  scale: ChartScale,
  onSelect: (range: DragRange) => void,
): void {
  let dragStartX: number | null = null;
  let band: SVGRectElement | null = null;

  const toLocalX = (event: MouseEvent): number => {
    const rect = svg.getBoundingClientRect();
    const width = rect.width || CHART_WIDTH;
    return ((event.clientX - rect.left) / width) * CHART_WIDTH;
  };

  svg.addEventListener("mousedown", (event) => {
    dragStartX = toLocalX(event);
    band = svgElement("rect", {
      x: String(dragStartX),
      y: String(PAD_TOP),
      width: "0",
      height: String(CHART_HEIGHT - PAD_TOP - PAD_BOTTOM),
      class: "drag-band",
    });
    svg.appendChild(band);
  });

  svg.addEventListener("mousemove", (event) => {
    if (dragStartX === null || !band) return;
    const x = toLocalX(event);
    band.setAttribute("x", String(Math.min(dragStartX, x)));
    band.setAttribute("width", String(Math.abs(x - dragStartX)));
  });

  svg.addEventListener("mouseup", (event) => {
    if (dragStartX === null) return;
    const endX = toLocalX(event);
    const startNs = xToTime(Math.min(dragStartX, endX), scale);
    const endNs = xToTime(Math.max(dragStartX, endX), scale);
    band?.remove();
    band = null;
    dragStartX = null;
    onSelect({ startNs, endNs }); // zero-width drags are point annotations
  });
}
