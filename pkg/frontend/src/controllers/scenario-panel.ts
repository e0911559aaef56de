// Earthquake what-ifs: define a scenario by its a/g value; the server
// rejects an acceleration that already exists and the warning is surfaced.

import { ApiError, Client } from "../api.js";
import type { ProjectView, ScenarioView } from "../types.js";

export class ScenarioPanel {
  scenarios: ScenarioView[] = [];
  metrics: string[] = [];
  warning: string | null = null;

  constructor(
    private readonly api: Client,
    private readonly projectId: string,
  ) {}

  async load(): Promise<void> {
    const project: ProjectView = await this.api.getProject(this.projectId);
    this.scenarios = project.capabilities.scenarios;
    this.metrics = project.capabilities.metrics;
  }

  /** True when the scenario was created; false leaves the warning set. */
  async add(ag: number, name = ""): Promise<boolean> {
    this.warning = null;
    try {
      await this.api.addScenario(this.projectId, ag, name);
    } catch (e) {
      if (e instanceof ApiError) {
        this.warning = `${e.code}: ${e.message}`;
        return false;
      }
      throw e;
    }
    await this.load();
    return true;
  }

  /** Toggle entries for the map view: one per defined scenario. */
  damageToggles(): { scenario: string; label: string }[] {
    return this.scenarios.map((s) => ({
      scenario: s.id,
      label: `${s.name || s.id} (a/g=${s.ag})`,
    }));
  }
}
