import { describe, expect, it } from "vitest";

import {
  parseViewState,
  resolveSelections,
  substituteVariables,
  viewStateToUrl,
} from "../src/state.js";

describe("view state URLs", () => {
  it("parses deep links", () => {
    const state = parseViewState("/d/main", "?from=now-6h&to=now&var-branch=dev&refresh=30");
    expect(state).toEqual({
      dashboardId: "main",
      range: { from: "now-6h", to: "now" },
      variables: { branch: "dev" },
      refreshSec: 30,
    });
  });

  it("applies defaults for missing params", () => {
    const state = parseViewState("/d/main", "");
    expect(state?.range).toEqual({ from: "now-24h", to: "now" });
    expect(state?.refreshSec).toBe(0);
    expect(state?.variables).toEqual({});
  });

  it("returns null off the dashboard route", () => {
    expect(parseViewState("/s/abc", "")).toBeNull();
    expect(parseViewState("/", "")).toBeNull();
  });

  it("round-trips through the URL", () => {
    const state = {
      dashboardId: "perf board",
      range: { from: "1000", to: "2000" },
      variables: { branch: "main", machine: "node 1" },
      refreshSec: 5,
    };
    const url = viewStateToUrl(state);
    const [path, search] = url.split("?");
    expect(parseViewState(path, `?${search}`)).toEqual(state);
  });
});

describe("variable resolution", () => {
  it("keeps requested values that are legal options", () => {
    expect(
      resolveSelections({ branch: "dev" }, { branch: ["main", "dev"] }),
    ).toEqual({ branch: "dev" });
  });

  it("falls back to the first option otherwise", () => {
    expect(
      resolveSelections({ branch: "gone" }, { branch: ["main", "dev"] }),
    ).toEqual({ branch: "main" });
    expect(resolveSelections({}, { branch: ["main"] })).toEqual({ branch: "main" });
  });

  it("drops variables with no options", () => {
    expect(resolveSelections({ branch: "x" }, { branch: [] })).toEqual({});
  });
});

describe("variable substitution", () => {
  it("expands placeholders exactly like the API", () => {
    expect(
      substituteVariables(
        { branch: "$branch", name: "BM_X" },
        { branch: "dev" },
      ),
    ).toEqual({ branch: "dev", name: "BM_X" });
  });

  it("throws on undeclared variables, naming them", () => {
    expect(() => substituteVariables({ a: "$missing" }, {})).toThrow(/missing/);
  });
});
