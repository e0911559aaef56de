// Scenario what-ifs: a new acceleration creates a scenario and unlocks the
// damage metric; repeating an acceleration surfaces the server's warning.

import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { ScenarioPanel } from "../src/controllers/scenario-panel.js";
import { RecordedApi, RecordedExchange } from "./recorded-api.js";
import recordings from "./fixtures/recorded.json";

function panel() {
  const api = new RecordedApi(recordings["scenario-panel"] as RecordedExchange[]);
  return { api, ctrl: new ScenarioPanel(new Client("", api.fetch), "demo") };
}

describe("scenario panel", () => {
  it("adding a scenario makes the damage map selectable", async () => {
    const { api, ctrl } = panel();
    await ctrl.load();
    expect(ctrl.scenarios).toEqual([]);
    expect(ctrl.metrics).toEqual(["Vulnerability"]);
    expect(ctrl.damageToggles()).toEqual([]);

    expect(await ctrl.add(0.3)).toBe(true);
    expect(ctrl.warning).toBeNull();
    expect(ctrl.metrics).toContain("Damage");
    expect(ctrl.scenarios.map((s) => s.ag)).toEqual([0.3]);
    expect(ctrl.damageToggles()).toHaveLength(1);
    expect(ctrl.damageToggles()[0].scenario).toBe("S1");

    // duplicate acceleration: warning surfaces, scenario list unchanged
    expect(await ctrl.add(0.3)).toBe(false);
    expect(ctrl.warning).toContain("DuplicateAcceleration");
    expect(ctrl.scenarios).toHaveLength(1);

    expect(api.remaining()).toBe(0);
  });
});
