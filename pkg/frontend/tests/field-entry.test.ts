// Field-data entry: coordinates round-trip, the survey section only shows
// for sampled buildings, the 11-class arity is enforced client-side before
// any request, and the computed index shown comes from the server.

import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { FieldEntry } from "../src/controllers/field-entry.js";
import { RecordedApi, RecordedExchange } from "./recorded-api.js";
import recordings from "./fixtures/recorded.json";

const EXCHANGES = recordings["field-entry"] as RecordedExchange[];
// the recording starts with the building the sampler selected
const SELECTED = parseInt(EXCHANGES[0].path.split("ids=")[1], 10);
const UNSELECTED = SELECTED === 1 ? 2 : 1;

function entry() {
  const api = new RecordedApi(EXCHANGES);
  return { api, ctrl: new FieldEntry(new Client("", api.fetch), "demo") };
}

describe("field entry", () => {
  it("drives the survey round-trip against the recorded server", async () => {
    const { api, ctrl } = entry();

    await ctrl.load(SELECTED);
    expect(ctrl.building!.id).toBe(SELECTED);
    expect(ctrl.surveyVisible()).toBe(true);
    expect(ctrl.building!.coord).toBeNull();

    // coordinates only; building shows them on the next fetch
    expect(await ctrl.submitLocation(517.25, 1329.5, "P0007")).toBe(true);
    expect(ctrl.building!.coord).toEqual([517.25, 1329.5]);
    expect(ctrl.building!.photo_id).toBe("P0007");
    expect(ctrl.building!.surveyed).toBe(false);

    // 10 of 11 classes: blocked client-side, no request goes out
    const before = api.log.length;
    for (let i = 1; i <= 10; i++) ctrl.setClass(i, "ABCDABCDAB"[i - 1]);
    expect(await ctrl.submitSurvey()).toBe(false);
    expect(ctrl.error).toContain("parameters 11");
    expect(api.log.length).toBe(before);

    // full survey: the row shows the engine's normalized index
    ctrl.setClass(11, "C");
    expect(await ctrl.submitSurvey()).toBe(true);
    expect(ctrl.building!.surveyed).toBe(true);
    expect(ctrl.building!.vi).toBeCloseTo(136.25, 9);
    expect(ctrl.building!.vi_norm).toBeCloseTo(136.25 / 3.825, 9);

    // a building outside the sample hides the survey section
    await ctrl.load(UNSELECTED);
    expect(ctrl.surveyVisible()).toBe(false);

    expect(api.remaining()).toBe(0);
  });

  it("rejects out-of-range class input outright", async () => {
    const { ctrl } = entry();
    expect(() => ctrl.setClass(0, "A")).toThrow();
    expect(() => ctrl.setClass(12, "A")).toThrow();
    expect(() => ctrl.setClass(3, "E")).toThrow();
  });
});
