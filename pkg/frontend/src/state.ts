// Application view state: which screen is open, which project is active,
// and the map toggles. Domain data itself always comes from API responses.

export const SCREENS = [
  "inventory",
  "create-project",
  "types",
  "typology-board",
  "sampling",
  "field-forms",
  "field-entry",
  "scenarios",
  "map-view",
] as const;

export type Screen = (typeof SCREENS)[number];

export interface MapToggles {
  metric: string;
  granularity: string;
  scenario: string | null;
}

export interface BuildingFilterState {
  ids: number[] | null;
  survey_kind: "Encuestadas" | "NO_Encuestadas" | null;
  edited: boolean | null;
  typology_id: string | null;
  vuln_level: string | null;
}

export interface ViewState {
  projectId: string | null;
  screen: Screen;
  mapToggles: MapToggles;
  filter: BuildingFilterState;
}

type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = {
    projectId: null,
    screen: "inventory",
    mapToggles: { metric: "Vulnerability", granularity: "Building", scenario: null },
    filter: {
      ids: null, survey_kind: null, edited: null, typology_id: null, vuln_level: null,
    },
  };
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}
