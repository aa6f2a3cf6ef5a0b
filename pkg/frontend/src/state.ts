// View state is fully reconstructible from the URL: deep links follow
// /d/{dashboard_id}?from=...&to=...&var-<name>=...&refresh=<seconds>

import { DEFAULT_RANGE, TimeRange } from "./time.js";

export interface ViewState {
  dashboardId: string;
  range: TimeRange;
  variables: Record<string, string>;
  refreshSec: number;
}

export function parseViewState(pathname: string, search: string): ViewState | null {
  const match = /^\/d\/([^/?]+)/.exec(pathname);
  if (!match) return null;
  const params = new URLSearchParams(search);
  const variables: Record<string, string> = {};
  for (const [key, value] of params) {
    if (key.startsWith("var-")) variables[key.slice(4)] = value;
  }
  return {
    dashboardId: decodeURIComponent(match[1]),
    range: {
      from: params.get("from") ?? DEFAULT_RANGE.from,
      to: params.get("to") ?? DEFAULT_RANGE.to,
    },
    variables,
    refreshSec: Number(params.get("refresh") ?? "0") || 0,
  };
}

export function viewStateToUrl(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("from", state.range.from);
  params.set("to", state.range.to);
  for (const [name, value] of Object.entries(state.variables)) {
    params.set(`var-${name}`, value);
  }
  if (state.refreshSec > 0) params.set("refresh", String(state.refreshSec));
  return `/d/${encodeURIComponent(state.dashboardId)}?${params.toString()}`;
}

/**
 * Clamp variable selections to the legal options: a selection stays only if
 * the options list still contains it, otherwise the first option applies.
 */
export function resolveSelections(
  requested: Record<string, string>,
  options: Record<string, string[]>,
): Record<string, string> {
  const resolved: Record<string, string> = {};
  for (const [name, values] of Object.entries(options)) {
    const wanted = requested[name];
    if (wanted !== undefined && values.includes(wanted)) {
      resolved[name] = wanted;
    } else if (values.length > 0) {
      resolved[name] = values[0];
    }
  }
  return resolved;
}

/** The API's $variable expansion, mirrored exactly for panel queries. */
export function substituteVariables(
  tags: Record<string, string>,
  selections: Record<string, string>,
): Record<string, string> {
  const out: Record<string, string> = {};
  for (const [key, value] of Object.entries(tags)) {
    if (value.startsWith("$")) {
      const name = value.slice(1);
      if (!(name in selections)) {
        throw new Error(`unresolved variable: ${name}`);
      }
      out[key] = selections[name];
    } else {
      out[key] = value;
    }
  }
  return out;
}
