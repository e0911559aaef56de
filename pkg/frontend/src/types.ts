// JSON shapes of the workbench HTTP API.

export interface ProjectEntry {
  id: string;
  name: string;
  state: string;
  date: string;
}

export interface ProjectListing {
  schema_version: number;
  projects: ProjectEntry[];
  errors: { id: string; error: string }[];
}

export interface ScenarioView {
  id: string;
  name: string;
  ag: number;
  meta: Record<string, number> | null;
  damage_count: number;
}

export interface Capabilities {
  granularities: string[];
  metrics: string[];
  scenarios: ScenarioView[];
}

export interface ProjectView {
  schema_version: number;
  id: string;
  name: string;
  description: string;
  author: string;
  date: string;
  state: string;
  stale: boolean;
  stale_reason: string;
  cutoff_year: number;
  vuln_thresholds: number[];
  damage_thresholds: number[];
  building_count: number;
  typology_count: number;
  unmatched_types: Record<string, string[]>;
  subtypology_count: number;
  unassigned_key_count: number;
  capabilities: Capabilities;
}

export interface TypologyView {
  id: string;
  name: string;
  description: string;
  subtypology_keys: string[];
  sample_quota: number | null;
  count: number;
  surveyed: number;
  avg_vi_norm: number | null;
  total_vi: number | null;
  level: string;
}

export interface TypologyBoardView {
  schema_version: number;
  typologies: TypologyView[];
  unassigned_keys: string[];
  masters: { id: string; name: string; description: string }[];
}

export interface BuildingView {
  id: number;
  kind: string;
  cadastral_key: string[] | null;
  block_key: string | null;
  wall_type: string;
  roof_type: string;
  use_type: string;
  state_type: string;
  construction_year: number | null;
  subtypology: string | null;
  typology_id: string | null;
  selected_for_survey: boolean;
  surveyed: boolean;
  edited: boolean;
  coord: number[] | null;
  photo_id: string | null;
  vi: number | null;
  vi_norm: number | null;
  vi_source: string;
}

export interface BuildingListing {
  schema_version: number;
  total: number;
  count: number;
  buildings: BuildingView[];
}

export interface TypesReport {
  schema_version: number;
  discovered: Record<string, Record<string, number>>;
  matched: Record<string, Record<string, string>>;
  unmatched: Record<string, string[]>;
}

export interface SampleResult {
  schema_version: number;
  seed: number;
  rng_id: string;
  selected: number[];
  by_typology: Record<string, number[]>;
  state: string;
}

export interface PropagationResult {
  schema_version: number;
  means: Record<string, number>;
  updated: Record<string, number[]>;
  without_survey: string[];
}

export interface FieldDataResult {
  schema_version: number;
  updated: number[];
  row_errors: { row_number: number; reason: string }[];
  stale: boolean;
}

export interface MapFeature {
  type: "Feature";
  geometry: { type: string; coordinates: unknown } | null;
  properties: {
    key: string;
    metric: string;
    value: number | null;
    level: string;
    n: number;
    scenario_id?: string;
    vi_source?: string;
    schema_version: number;
  };
}

export interface FeatureCollection {
  type: "FeatureCollection";
  coordinate_system: string;
  schema_version: number;
  features: MapFeature[];
}

export interface FieldRecordInput {
  building_id?: number;
  new_independent?: boolean;
  x?: number;
  y?: number;
  photo_id?: string;
  classes?: string[];
  raw?: Record<string, number>;
  observer_id?: string;
  date?: string;
  corrections?: Record<string, string | number>;
}
