// Project inventory: the entry screen listing every study under the root.

import { Client } from "../api.js";
import type { ProjectEntry } from "../types.js";

export class Inventory {
  projects: ProjectEntry[] = [];
  problems: { id: string; error: string }[] = [];

  constructor(private readonly api: Client) {}

  async load(): Promise<void> {
    const listing = await this.api.listProjects();
    this.projects = listing.projects;
    this.problems = listing.errors;
  }
}
