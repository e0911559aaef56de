// Map toggles: each metric/granularity change issues exactly one map request
// with the right query string, and only layer-backed granularities are
// offered at all.

import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { MapView } from "../src/controllers/map-view.js";
import { RecordedApi, RecordedExchange } from "./recorded-api.js";
import recordings from "./fixtures/recorded.json";

function view() {
  const api = new RecordedApi(recordings["map-view"] as RecordedExchange[]);
  return { api, ctrl: new MapView(new Client("", api.fetch), "demo") };
}

describe("map view", () => {
  it("granularity and metric toggles issue the recorded map requests", async () => {
    const { api, ctrl } = view();
    await ctrl.load();
    expect(ctrl.granularityOptions()).toEqual(["Building", "Block", "Project"]);
    expect(ctrl.featureCount()).toBe(2); // two located buildings

    expect(await ctrl.setGranularity("Block")).toBe(true);
    expect(await ctrl.setGranularity("Project")).toBe(true);
    expect(await ctrl.setMetric("Damage", "S1")).toBe(true);

    const mapRequests = api.log.filter((line) => line.includes("/maps?"));
    expect(mapRequests).toEqual([
      "GET /projects/demo/maps?metric=Vulnerability&granularity=Building",
      "GET /projects/demo/maps?metric=Vulnerability&granularity=Block",
      "GET /projects/demo/maps?metric=Vulnerability&granularity=Project",
      "GET /projects/demo/maps?metric=Damage&granularity=Project&scenario=S1",
    ]);

    // layer-less project offers only the building granularity
    await ctrl.load("noarea");
    expect(ctrl.granularityOptions()).toEqual(["Building"]);
    const before = api.log.length;
    expect(await ctrl.setGranularity("Block")).toBe(false);
    expect(api.log.length).toBe(before); // refused locally, no request

    expect(api.remaining()).toBe(0);
  });

  it("map features carry the classification level for client-side styling", async () => {
    const { ctrl } = view();
    await ctrl.load();
    const levels = ctrl.legend();
    expect(levels.length).toBeGreaterThan(0);
    for (const { level } of levels) {
      expect(typeof level).toBe("string");
    }
    // every displayed number originates from the API response
    const total = levels.reduce((acc, l) => acc + l.count, 0);
    expect(total).toBe(ctrl.featureCount());
  });

  it("damage metric requires a known scenario", async () => {
    const { api, ctrl } = view();
    await ctrl.load();
    const before = api.log.length;
    expect(await ctrl.setMetric("Damage", "S99")).toBe(false);
    expect(await ctrl.setMetric("Damage", null)).toBe(false);
    expect(api.log.length).toBe(before);
  });
});
