// Typed client for the workbench HTTP API. The transport is injectable so
// tests can replay recorded server traffic instead of hitting the network.

import type {
  BuildingListing,
  FeatureCollection,
  FieldDataResult,
  FieldRecordInput,
  ProjectListing,
  ProjectView,
  PropagationResult,
  SampleResult,
  ScenarioView,
  TypesReport,
  TypologyBoardView,
  TypologyView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface BuildingQuery {
  ids?: number[];
  survey_kind?: "Encuestadas" | "NO_Encuestadas";
  edited?: boolean;
  typology_id?: string;
  vuln_level?: string;
}

export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let code = `HTTP${response.status}`;
      let message = response.statusText;
      try {
        const payload = await response.json();
        code = payload.error ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listProjects(): Promise<ProjectListing> {
    return this.request("GET", "/projects");
  }

  createProject(body: { name: string; id?: string; description?: string; author?: string }) {
    return this.request<ProjectView>("POST", "/projects", body);
  }

  getProject(id: string): Promise<ProjectView> {
    return this.request("GET", `/projects/${id}`);
  }

  uploadCadastre(id: string, csv: string) {
    return this.fetchImpl(`${this.base}/projects/${id}/cadastre`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    }).then(async (response) => {
      if (!response.ok) {
        const payload = await response.json();
        throw new ApiError(response.status, payload.error, payload.message);
      }
      return response.json();
    });
  }

  getTypes(id: string): Promise<TypesReport> {
    return this.request("GET", `/projects/${id}/types`);
  }

  registerType(id: string, category: string, code: string, label: string) {
    return this.request("POST", `/projects/${id}/types`, {
      action: "register", category, code, label, alias: "",
    });
  }

  addAlias(id: string, category: string, alias: string, code: string) {
    return this.request("POST", `/projects/${id}/types`, {
      action: "alias", category, code, label: "", alias,
    });
  }

  getTypologies(id: string): Promise<TypologyBoardView> {
    return this.request("GET", `/projects/${id}/typologies`);
  }

  createTypology(id: string, name: string, description = "") {
    return this.request<TypologyView>("POST", `/projects/${id}/typologies`, {
      name, description,
    });
  }

  importTypology(id: string, masterId: string) {
    return this.request<TypologyView>("POST", `/projects/${id}/typologies`, {
      master_id: masterId,
    });
  }

  deleteTypology(id: string, tid: string) {
    return this.request("DELETE", `/projects/${id}/typologies/${tid}`);
  }

  assignKeys(id: string, tid: string, keys: string[]): Promise<TypologyView> {
    return this.request("POST", `/projects/${id}/typologies/${tid}/keys`, { keys });
  }

  unassignKeys(id: string, tid: string, keys: string[]): Promise<TypologyView> {
    return this.request("DELETE", `/projects/${id}/typologies/${tid}/keys`, { keys });
  }

  sample(id: string, mode: string, amount: number | Record<string, number>, seed: number) {
    return this.request<SampleResult>("POST", `/projects/${id}/sample`, {
      mode, amount, seed,
    });
  }

  fieldFormUrl(id: string, report: "buildings" | "survey"): string {
    return `${this.base}/projects/${id}/field-forms?report=${report}`;
  }

  postFieldData(id: string, records: FieldRecordInput[]): Promise<FieldDataResult> {
    return this.request("POST", `/projects/${id}/field-data`, { records });
  }

  addScenario(id: string, ag: number, name = ""): Promise<ScenarioView> {
    return this.request("POST", `/projects/${id}/scenarios`, { ag, name });
  }

  propagate(id: string): Promise<PropagationResult> {
    return this.request("POST", `/projects/${id}/propagate`);
  }

  recompute(id: string): Promise<ProjectView> {
    return this.request("POST", `/projects/${id}/recompute`);
  }

  advanceState(id: string, target: string): Promise<ProjectView> {
    return this.request("POST", `/projects/${id}/state`, { target });
  }

  getBuildings(id: string, query: BuildingQuery = {}): Promise<BuildingListing> {
    const params = new URLSearchParams();
    if (query.ids?.length) params.set("ids", query.ids.join(","));
    if (query.survey_kind) params.set("survey_kind", query.survey_kind);
    if (query.edited !== undefined) params.set("edited", String(query.edited));
    if (query.typology_id) params.set("typology_id", query.typology_id);
    if (query.vuln_level) params.set("vuln_level", query.vuln_level);
    const qs = params.toString();
    return this.request("GET", `/projects/${id}/buildings${qs ? "?" + qs : ""}`);
  }

  getMap(
    id: string,
    metric: string,
    granularity: string,
    scenario?: string,
  ): Promise<FeatureCollection> {
    let path = `/projects/${id}/maps?metric=${metric}&granularity=${granularity}`;
    if (scenario) path += `&scenario=${scenario}`;
    return this.request("GET", path);
  }
}
