import { describe, expect, it } from "vitest";

import { ApiClient, type SampleRecord } from "../src/api.js";
import { actionForKey } from "../src/keyboard.js";
import { LabelGrid } from "../src/labelGrid.js";
import { fakeFetch, type Route } from "./helpers.js";

function sample(id: number, label: SampleRecord["label"] = "unlabeled"): SampleRecord {
  return { id, path: `s#${id}`, label, source: "simulator", timestamp: null };
}

function gridWith(routes: Route[]) {
  const { fetch, calls } = fakeFetch(routes);
  return { grid: new LabelGrid(new ApiClient("", fetch), 4), calls };
}

const samplesRoute =
  (items: SampleRecord[]): Route =>
  (url) => {
    if (!url.startsWith("/samples?")) return null;
    const params = new URLSearchParams(url.split("?")[1]);
    const state = params.get("state");
    const kept = items.filter((s) =>
      state === "labeled" ? s.label !== "unlabeled"
      : state === "unlabeled" ? s.label === "unlabeled"
      : true,
    );
    return { body: { total: kept.length, offset: Number(params.get("offset")), items: kept } };
  };

describe("LabelGrid", () => {
  it("keyboard '+' maps to a particle POST for the focused tile", async () => {
    const items = [sample(0), sample(1)];
    const { grid, calls } = gridWith([
      samplesRoute(items),
      (url) => (url === "/labels" ? { body: { ...items[1], label: "particle", source: "hand" } } : null),
    ]);
    await grid.loadPage(0);
    grid.moveFocus(1);
    const action = actionForKey("+");
    expect(action).toEqual({ kind: "label", label: "particle" });
    if (action?.kind !== "label") throw new Error("unreachable");
    await grid.labelFocused(action.label);
    const post = calls.find((c) => c.method === "POST");
    expect(post?.body).toEqual({ id: 1, label: "particle" });
  });

  it("shows server-confirmed state only", async () => {
    const items = [sample(0)];
    // the server replies with non_particle regardless of what was sent
    const confirmed = { ...items[0], label: "non_particle" as const, source: "hand" as const };
    const { grid } = gridWith([
      samplesRoute(items),
      (url) => (url === "/labels" ? { body: confirmed } : null),
    ]);
    await grid.loadPage(0);
    await grid.labelFocused("particle");
    expect(grid.samples[0]).toEqual(confirmed);
  });

  it("marks failed submissions for retry instead of dropping them", async () => {
    const { grid } = gridWith([
      samplesRoute([sample(0)]),
      (url) => (url === "/labels" ? { status: 500, body: { detail: "boom" } } : null),
    ]);
    await grid.loadPage(0);
    await expect(grid.labelFocused("particle")).rejects.toThrow();
    expect(grid.failed.has(0)).toBe(true);
    expect(grid.samples[0].label).toBe("unlabeled"); // unchanged without confirmation
  });

  it("takes label counts from the service totals", async () => {
    const items = [sample(0, "particle"), sample(1, "non_particle"), sample(2)];
    const { grid } = gridWith([samplesRoute(items)]);
    await grid.loadPage(0);
    expect(await grid.counts()).toEqual({ labeled: 2, unlabeled: 1 });
  });

  it("clamps focus movement to the page", async () => {
    const { grid } = gridWith([samplesRoute([sample(0), sample(1)])]);
    await grid.loadPage(0);
    grid.moveFocus(-1);
    expect(grid.focus).toBe(0);
    grid.moveFocus(1);
    grid.moveFocus(5);
    expect(grid.focus).toBe(1);
  });
});
