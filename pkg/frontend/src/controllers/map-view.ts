// Thematic map pane. The metric/granularity/scenario toggles only ever offer
// what the server's capability response allows (granularities require their
// layers), and every toggle change fetches the map anew.

import { Client } from "../api.js";
import type { Capabilities, FeatureCollection } from "../types.js";

export class MapView {
  capabilities: Capabilities = { granularities: [], metrics: [], scenarios: [] };
  metric = "Vulnerability";
  granularity = "Building";
  scenario: string | null = null;
  collection: FeatureCollection | null = null;

  constructor(
    private readonly api: Client,
    private projectId: string,
  ) {}

  async load(projectId?: string): Promise<void> {
    if (projectId) this.projectId = projectId;
    const project = await this.api.getProject(this.projectId);
    this.capabilities = project.capabilities;
    this.metric = "Vulnerability";
    this.granularity = this.capabilities.granularities[0] ?? "Building";
    this.scenario = null;
    await this.refresh();
  }

  granularityOptions(): string[] {
    return this.capabilities.granularities;
  }

  metricOptions(): string[] {
    return this.capabilities.metrics;
  }

  scenarioOptions(): { id: string; label: string }[] {
    return this.capabilities.scenarios.map((s) => ({
      id: s.id,
      label: `${s.name || s.id} (a/g=${s.ag})`,
    }));
  }

  /** Switch granularity; ignored unless the capability response offers it. */
  async setGranularity(granularity: string): Promise<boolean> {
    if (!this.capabilities.granularities.includes(granularity)) return false;
    this.granularity = granularity;
    await this.refresh();
    return true;
  }

  async setMetric(metric: string, scenario: string | null = null): Promise<boolean> {
    if (!this.capabilities.metrics.includes(metric)) return false;
    if (metric === "Damage") {
      if (!scenario || !this.capabilities.scenarios.some((s) => s.id === scenario)) {
        return false;
      }
      this.scenario = scenario;
    } else {
      this.scenario = null;
    }
    this.metric = metric;
    await this.refresh();
    return true;
  }

  async refresh(): Promise<void> {
    this.collection = await this.api.getMap(
      this.projectId, this.metric, this.granularity, this.scenario ?? undefined);
  }

  featureCount(): number {
    return this.collection?.features.length ?? 0;
  }

  /** Levels present in the current map, for the legend. */
  legend(): { level: string; count: number }[] {
    const counts = new Map<string, number>();
    for (const f of this.collection?.features ?? []) {
      counts.set(f.properties.level, (counts.get(f.properties.level) ?? 0) + 1);
    }
    return [...counts.entries()].map(([level, count]) => ({ level, count }));
  }
}
