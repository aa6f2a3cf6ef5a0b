// Time range handling. Relative expressions ("now", "now-6h") are passed to
// the API verbatim so the server clock resolves them; absolute values are
// nanosecond strings.

export interface TimeRange {
  from: string;
  to: string;
}

export const PRESETS: { label: string; from: string }[] = [
  { label: "Last 1h", from: "now-1h" },
  { label: "Last 6h", from: "now-6h" },
  { label: "Last 24h", from: "now-24h" },
  { label: "Last 7d", from: "now-7d" },
  { label: "Last 30d", from: "now-30d" },
  { label: "Last 90d", from: "now-90d" },
];

export const DEFAULT_RANGE: TimeRange = { from: "now-24h", to: "now" };

const RELATIVE = /^now(-(\d+)([smhd]))?$/;
const UNIT_NS: Record<string, number> = {
  s: 1e9,
  m: 60e9,
  h: 3600e9,
  d: 86400e9,
};

export function isRelative(value: string): boolean {
  return RELATIVE.test(value);
}

/** Resolve a range bound to nanoseconds for local math (chart axes). */
export function resolveNs(value: string, nowNs: number): number {
  const match = RELATIVE.exec(value);
  if (match) {
    if (!match[1]) return nowNs;
    return nowNs - Number(match[2]) * UNIT_NS[match[3]];
  }
  const absolute = Number(value);
  if (!Number.isFinite(absolute)) {
    throw new Error(`bad time value: ${value}`);
  }
  return absolute;
}

export function formatTimestamp(ns: number): string {
  return new Date(ns / 1e6).toISOString().replace("T", " ").slice(0, 19);
}
