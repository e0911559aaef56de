// Field-data entry for one building: GPS point, photo id, cadastral checks,
// and (only for buildings selected for survey) the 11 parameter classes.
// The class arity is validated client-side before any request goes out.

import { ApiError, Client } from "../api.js";
import type { BuildingView } from "../types.js";

export const PARAM_COUNT = 11;
export const CLASS_VALUES = ["A", "B", "C", "D"];

export class FieldEntry {
  building: BuildingView | null = null;
  classes: (string | null)[] = new Array(PARAM_COUNT).fill(null);
  raw: Record<string, number> = {};
  error: string | null = null;

  constructor(
    private readonly api: Client,
    private readonly projectId: string,
  ) {}

  async load(buildingId: number): Promise<void> {
    const listing = await this.api.getBuildings(this.projectId, { ids: [buildingId] });
    this.building = listing.buildings[0] ?? null;
    this.classes = new Array(PARAM_COUNT).fill(null);
    this.raw = {};
    this.error = null;
  }

  /** The survey section only shows for buildings chosen by the sampling. */
  surveyVisible(): boolean {
    return this.building?.selected_for_survey ?? false;
  }

  setClass(parameter: number, value: string): void {
    if (parameter < 1 || parameter > PARAM_COUNT || !CLASS_VALUES.includes(value)) {
      throw new Error(`parameter 1..${PARAM_COUNT}, class A-D; got ${parameter}=${value}`);
    }
    this.classes[parameter - 1] = value;
  }

  setRaw(name: string, value: number): void {
    this.raw[name] = value;
  }

  missingClasses(): number[] {
    return this.classes.flatMap((c, i) => (c === null ? [i + 1] : []));
  }

  async submitLocation(x: number, y: number, photoId?: string): Promise<boolean> {
    if (!this.building) return false;
    this.error = null;
    try {
      await this.api.postFieldData(this.projectId, [
        { building_id: this.building.id, x, y, photo_id: photoId },
      ]);
    } catch (e) {
      if (e instanceof ApiError) {
        this.error = `${e.code}: ${e.message}`;
        return false;
      }
      throw e;
    }
    await this.load(this.building.id);
    return true;
  }

  /** Blocks client-side unless all 11 classes are given. */
  async submitSurvey(observer = "", date = ""): Promise<boolean> {
    if (!this.building) return false;
    const missing = this.missingClasses();
    if (missing.length > 0) {
      this.error = `survey incomplete: missing classes for parameters ${missing.join(", ")}`;
      return false;
    }
    this.error = null;
    try {
      await this.api.postFieldData(this.projectId, [{
        building_id: this.building.id,
        classes: this.classes as string[],
        raw: this.raw,
        observer_id: observer,
        date,
      }]);
    } catch (e) {
      if (e instanceof ApiError) {
        this.error = `${e.code}: ${e.message}`;
        return false;
      }
      throw e;
    }
    await this.load(this.building.id);
    return true;
  }
}
