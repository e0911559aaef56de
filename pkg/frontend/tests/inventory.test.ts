import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { Inventory } from "../src/controllers/inventory.js";
import { RecordedApi, RecordedExchange } from "./recorded-api.js";
import recordings from "./fixtures/recorded.json";

describe("inventory", () => {
  it("lists every project from the server", async () => {
    const api = new RecordedApi(recordings["inventory"] as RecordedExchange[]);
    const ctrl = new Inventory(new Client("", api.fetch));
    await ctrl.load();
    expect(ctrl.projects.map((p) => p.id)).toEqual(["lezcano", "quezalguaque"]);
    expect(ctrl.projects[0].state).toBe("Created");
    expect(ctrl.problems).toEqual([]);
    expect(api.remaining()).toBe(0);
  });
});
