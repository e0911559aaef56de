// Three synchronized grids: unassigned subtypology keys on top, the
// project's typologies in the middle, the selected typology's members below.
// Every count shown is the server's: mutations re-fetch the board.

import { ApiError, Client } from "../api.js";
import type { TypologyBoardView, TypologyView } from "../types.js";

export class TypologyBoard {
  unassigned: string[] = [];
  typologies: TypologyView[] = [];
  masters: { id: string; name: string; description: string }[] = [];
  selectedId: string | null = null;
  error: string | null = null;

  constructor(
    private readonly api: Client,
    private readonly projectId: string,
  ) {}

  async load(): Promise<void> {
    const view: TypologyBoardView = await this.api.getTypologies(this.projectId);
    this.unassigned = view.unassigned_keys;
    this.typologies = view.typologies;
    this.masters = view.masters;
    if (this.selectedId && !this.typologies.some((t) => t.id === this.selectedId)) {
      this.selectedId = null;
    }
    if (this.selectedId === null && this.typologies.length > 0) {
      this.selectedId = this.typologies[0].id;
    }
  }

  select(tid: string): void {
    this.selectedId = tid;
  }

  get selected(): TypologyView | null {
    return this.typologies.find((t) => t.id === this.selectedId) ?? null;
  }

  /** Member keys of the selected typology (the bottom grid). */
  memberKeys(): string[] {
    return this.selected?.subtypology_keys ?? [];
  }

  typology(tid: string): TypologyView | null {
    return this.typologies.find((t) => t.id === tid) ?? null;
  }

  private async mutate(action: () => Promise<unknown>): Promise<boolean> {
    this.error = null;
    try {
      await action();
    } catch (e) {
      if (e instanceof ApiError) {
        this.error = `${e.code}: ${e.message}`;
        return false;
      }
      throw e;
    }
    await this.load();
    return true;
  }

  assign(tid: string, keys: string[]): Promise<boolean> {
    return this.mutate(() => this.api.assignKeys(this.projectId, tid, keys));
  }

  unassign(tid: string, keys: string[]): Promise<boolean> {
    return this.mutate(() => this.api.unassignKeys(this.projectId, tid, keys));
  }

  create(name: string, description = ""): Promise<boolean> {
    return this.mutate(() => this.api.createTypology(this.projectId, name, description));
  }

  importMaster(masterId: string): Promise<boolean> {
    return this.mutate(() => this.api.importTypology(this.projectId, masterId));
  }

  remove(tid: string): Promise<boolean> {
    return this.mutate(() => this.api.deleteTypology(this.projectId, tid));
  }
}
