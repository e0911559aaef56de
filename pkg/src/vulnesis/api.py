"""HTTP JSON service over the project store.

Thin adapter: every endpoint delegates to a module operation, persists through
the store before responding, and maps module errors to stable machine codes.
"""

from __future__ import annotations

import dataclasses
import logging
import threading
from collections import defaultdict
from pathlib import Path
from typing import Any, Mapping, Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import errors as err
from . import geo, ingest, pipeline, risk, store, typology
from .domain import (
    Building,
    LayerKind,
    Project,
    ProjectState,
    ScaleRow,
    ScenarioMeta,
    SubTypologyKey,
    VulnerabilityScale,
)
from .typology import SampleMode, SampleSpec

log = logging.getLogger("vulnesis.api")

SCHEMA_VERSION = store.SCHEMA_VERSION

#: HTTP status per error category: state/uniqueness conflicts 409,
#: validation 422, lookups 404, persistence faults 500
STATUS = {
    err.IllegalTransition: 409,
    err.WrongState: 409,
    err.StaleProject: 409,
    err.DuplicateAcceleration: 409,
    err.DuplicateName: 409,
    err.DuplicateCode: 409,
    err.KeyAlreadyAssigned: 409,
    err.KeyNotMember: 409,
    err.LockHeld: 409,
    err.UnreconciledTypes: 409,
    err.UnassignedBuildingsRemain: 409,
    err.NothingSurveyed: 409,
    err.NoBlocksLayer: 409,
    err.MissingLayer: 409,
    err.SchemaTooNew: 409,
    err.UnknownProject: 404,
    err.UnknownBuilding: 404,
    err.UnknownScenario: 404,
    err.UnknownTypology: 404,
    err.UnknownMaster: 404,
    err.UnknownCode: 404,
    err.MissingColumn: 422,
    err.IncompleteSurvey: 422,
    err.WrongArity: 422,
    err.OutOfRange: 422,
    err.BadBandConfig: 422,
    err.InvalidScale: 422,
    err.BadSampleSpec: 422,
    err.QuotaExceedsPopulation: 422,
    err.NotAFeatureCollection: 422,
    err.MissingKeyProperty: 422,
    err.DegenerateRing: 422,
    err.UnknownLevel: 422,
    err.UnknownKind: 422,
    err.InvalidRequest: 422,
    err.CorruptFile: 500,
    err.IoFailure: 500,
}


# --- request bodies -----------------------------------------------------------

class ProjectIn(BaseModel):
    name: str
    description: str = ""
    author: str = ""
    id: Optional[str] = None
    cutoff_year: int = 1972


class TypeActionIn(BaseModel):
    action: str  # register | alias
    category: str
    code: str
    label: str = ""
    alias: str = ""


class TypologyIn(BaseModel):
    name: Optional[str] = None
    description: str = ""
    master_id: Optional[str] = None


class KeysIn(BaseModel):
    keys: list[str]


class SampleIn(BaseModel):
    mode: str
    amount: float | int | dict[str, float] | None = None
    seed: int = 0


class ScenarioIn(BaseModel):
    ag: float
    name: str = ""
    meta: Optional[dict[str, float]] = None


class FieldDataIn(BaseModel):
    records: list[dict[str, Any]]


class StateIn(BaseModel):
    target: str


class ScaleIn(BaseModel):
    rows: list[dict[str, Any]]


class ThresholdsIn(BaseModel):
    vuln_thresholds: Optional[list[float]] = None
    damage_thresholds: Optional[list[float]] = None


# --- JSON views ----------------------------------------------------------------

def building_view(b: Building) -> dict[str, Any]:
    return {
        "id": b.id,
        "kind": b.kind.value,
        "cadastral_key": list(b.cadastral_key.parts()) if b.cadastral_key else None,
        "block_key": b.cadastral_key.block_key() if b.cadastral_key else None,
        "wall_type": b.wall_type,
        "roof_type": b.roof_type,
        "use_type": b.use_type,
        "state_type": b.state_type,
        "construction_year": b.construction_year,
        "subtypology": b.subtypology.label() if b.subtypology else None,
        "typology_id": b.typology_id,
        "selected_for_survey": b.selected_for_survey,
        "surveyed": b.surveyed,
        "edited": b.edited,
        "coord": list(b.coord) if b.coord else None,
        "photo_id": b.photo_id,
        "vi": b.vi,
        "vi_norm": b.vi_norm,
        "vi_source": b.vi_source.value,
    }


def typology_view(project: Project, tid: str) -> dict[str, Any]:
    t = project.typology(tid)
    stats = typology.typology_stats(project, tid)
    return {
        "id": t.id,
        "name": t.name,
        "description": t.description,
        "subtypology_keys": sorted(k.label() for k in t.subtypology_keys),
        "sample_quota": t.sample_quota,
        "count": stats.count,
        "surveyed": stats.surveyed,
        "avg_vi_norm": stats.avg_vi_norm,
        "total_vi": stats.total_vi,
        "level": stats.level,
    }


def scenario_view(s) -> dict[str, Any]:
    return {
        "id": s.id,
        "name": s.name,
        "ag": s.ag,
        "meta": dataclasses.asdict(s.meta) if s.meta else None,
        "damage_count": len(s.damages),
    }


def project_view(project: Project) -> dict[str, Any]:
    granularities = ["Building"]
    if project.layer(LayerKind.Blocks) is not None:
        granularities.append("Block")
    if project.layer(LayerKind.ProjectArea) is not None:
        granularities.append("Project")
    report = ingest.reconcile_types(
        ingest.discover_types(project.cadastral_buildings()), project.masters)
    return {
        "schema_version": SCHEMA_VERSION,
        "id": project.id,
        "name": project.name,
        "description": project.description,
        "author": project.author,
        "date": project.date,
        "state": project.state.name,
        "stale": project.stale,
        "stale_reason": project.stale_reason,
        "cutoff_year": project.cutoff_year,
        "vuln_thresholds": list(project.vuln_thresholds),
        "damage_thresholds": list(project.damage_thresholds),
        "building_count": len(project.buildings),
        "typology_count": len(project.typologies),
        "unmatched_types": {c: list(v) for c, v in report.unmatched.items() if v},
        "subtypology_count": len(project.discovered_keys()),
        "unassigned_key_count": len(project.unassigned_keys()),
        "capabilities": {
            "granularities": granularities,
            "metrics": ["Vulnerability"] + (["Damage"] if project.scenarios else []),
            "scenarios": [scenario_view(s) for s in project.scenarios],
        },
    }


def scale_view(project: Project) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": [{"name": r.name, "k": dict(r.k), "w": r.w} for r in project.scale.rows],
        "max_vi": project.scale.max_vi(),
        "stale": project.stale,
    }


def _parse_keys(labels: list[str]) -> list[SubTypologyKey]:
    return [SubTypologyKey.from_label(s) for s in labels]


def _record_from(doc: Mapping[str, Any]) -> ingest.FieldRecord:
    classes = doc.get("classes")
    return ingest.FieldRecord(
        building_id=doc.get("building_id"),
        new_independent=bool(doc.get("new_independent", False)),
        x=doc.get("x"),
        y=doc.get("y"),
        photo_id=doc.get("photo_id"),
        classes=tuple(classes) if classes is not None else None,
        raw=doc.get("raw", {}),
        observer_id=doc.get("observer_id", ""),
        date=doc.get("date", ""),
        corrections=doc.get("corrections", {}),
    )


def create_app(root: Path | str) -> FastAPI:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="vulnesis", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    @app.exception_handler(err.VulnesisError)
    async def _vulnesis_error(request: Request, exc: err.VulnesisError):
        status = STATUS.get(type(exc), 400)
        return JSONResponse(
            status_code=status,
            content={"error": exc.code, "message": str(exc),
                     "schema_version": SCHEMA_VERSION},
        )

    def mutate(pid: str, fn):
        """Load-modify-save under the per-project mutex; returns fn's extra value."""
        with locks[pid]:
            project = store.load_project(root, pid)
            project, result = fn(project)
            store.save_project(project, root)
            return project, result

    # --- inventory / project ----------------------------------------------

    @app.get("/projects")
    def projects_index():
        entries, problems = store.list_projects(root)
        return {
            "schema_version": SCHEMA_VERSION,
            "projects": [dataclasses.asdict(e) for e in entries],
            "errors": [dataclasses.asdict(e) for e in problems],
        }

    @app.post("/projects", status_code=201)
    def projects_create(body: ProjectIn):
        system = store.load_system_masters(root)
        project = pipeline.create_project(
            body.name, system, project_id=body.id, description=body.description,
            author=body.author, cutoff_year=body.cutoff_year)
        entries, _ = store.list_projects(root)
        if any(e.id == project.id for e in entries):
            raise err.DuplicateName(f"project id {project.id!r} already exists")
        store.save_project(project, root)
        return project_view(project)

    @app.get("/projects/{pid}")
    def project_show(pid: str):
        return project_view(store.load_project(root, pid))

    # --- cadastre / types ---------------------------------------------------

    @app.post("/projects/{pid}/cadastre")
    async def cadastre_upload(pid: str, request: Request):
        payload = await request.body()
        rows, row_errors = ingest.parse_cadastre(payload)

        def step(project):
            project = ingest.attach_cadastre(project, rows)
            return project, {
                "schema_version": SCHEMA_VERSION,
                "attached": len(rows),
                "row_errors": [dataclasses.asdict(e) for e in row_errors],
            }

        _, result = mutate(pid, step)
        return result

    @app.get("/projects/{pid}/types")
    def types_show(pid: str):
        project = store.load_project(root, pid)
        discovered = ingest.discover_types(project.cadastral_buildings())
        report = ingest.reconcile_types(discovered, project.masters)
        return {
            "schema_version": SCHEMA_VERSION,
            "discovered": discovered,
            "matched": report.matched,
            "unmatched": {c: list(v) for c, v in report.unmatched.items()},
        }

    @app.post("/projects/{pid}/types")
    def types_edit(pid: str, body: TypeActionIn):
        system = store.load_system_masters(root)

        def step(project):
            nonlocal system
            if body.action == "register":
                project, system = pipeline.register_type(
                    project, system, body.category, body.code, body.label)
            elif body.action == "alias":
                project, system = pipeline.add_alias(
                    project, system, body.category, body.alias, body.code)
            else:
                raise err.InvalidRequest(f"unknown types action {body.action!r}")
            return project, None

        project, _ = mutate(pid, step)
        store.save_system_masters(system, root)
        report = ingest.reconcile_types(
            ingest.discover_types(project.cadastral_buildings()), project.masters)
        return {
            "schema_version": SCHEMA_VERSION,
            "unmatched": {c: list(v) for c, v in report.unmatched.items()},
        }

    # --- typologies -----------------------------------------------------------

    @app.get("/projects/{pid}/typologies")
    def typologies_index(pid: str):
        project = store.load_project(root, pid)
        return {
            "schema_version": SCHEMA_VERSION,
            "typologies": [typology_view(project, t.id) for t in project.typologies],
            "unassigned_keys": sorted(k.label() for k in project.unassigned_keys()),
            "masters": [
                dataclasses.asdict(m)
                for m in store.load_system_masters(root).typologies
            ],
        }

    @app.post("/projects/{pid}/typologies", status_code=201)
    def typologies_create(pid: str, body: TypologyIn):
        system = store.load_system_masters(root)

        def step(project):
            nonlocal system
            if body.master_id:
                project, t = typology.import_master_typology(project, system, body.master_id)
            else:
                if not body.name:
                    raise err.InvalidRequest("typology name or master_id required")
                project, system, t = typology.create_typology(
                    project, system, body.name, body.description)
            return project, t

        project, t = mutate(pid, step)
        store.save_system_masters(system, root)
        return typology_view(project, t.id)

    @app.delete("/projects/{pid}/typologies/{tid}")
    def typologies_delete(pid: str, tid: str):
        def step(project):
            return typology.delete_typology(project, tid), None

        project, _ = mutate(pid, step)
        return {"schema_version": SCHEMA_VERSION,
                "unassigned_keys": sorted(k.label() for k in project.unassigned_keys())}

    @app.post("/projects/{pid}/typologies/{tid}/keys")
    def keys_assign(pid: str, tid: str, body: KeysIn):
        def step(project):
            project, t = typology.assign_subtypologies(project, tid, _parse_keys(body.keys))
            return project, t

        project, _ = mutate(pid, step)
        return typology_view(project, tid)

    @app.delete("/projects/{pid}/typologies/{tid}/keys")
    def keys_unassign(pid: str, tid: str, body: KeysIn):
        def step(project):
            project, t = typology.unassign_subtypologies(project, tid, _parse_keys(body.keys))
            return project, t

        project, _ = mutate(pid, step)
        return typology_view(project, tid)

    # --- sampling / forms / field data --------------------------------------------

    @app.post("/projects/{pid}/sample")
    def sample_run(pid: str, body: SampleIn):
        try:
            mode = SampleMode(body.mode)
        except ValueError:
            raise err.BadSampleSpec(f"unknown sampling mode {body.mode!r}") from None
        if body.amount is None:
            raise err.BadSampleSpec("sampling amount required")
        spec = SampleSpec(mode=mode, amount=body.amount, seed=body.seed)

        def step(project):
            return typology.sample(project, spec)

        project, report = mutate(pid, step)
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": report.seed,
            "rng_id": report.rng_id,
            "selected": list(report.selected),
            "by_typology": {tid: list(ids) for tid, ids in report.by_typology.items()},
            "state": project.state.name,
        }

    @app.get("/projects/{pid}/field-forms")
    def field_forms(pid: str, report: str = Query("buildings")):
        from .forms import export_field_forms

        project = store.load_project(root, pid)
        documents = export_field_forms(project)
        if report not in documents:
            raise err.InvalidRequest(f"report must be one of {sorted(documents)}")
        return Response(content=documents[report], media_type="text/csv; charset=utf-8")

    @app.post("/projects/{pid}/field-data")
    async def field_data(pid: str, request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("text/csv"):
            payload = await request.body()
            records, row_errors = ingest.parse_field_csv(payload)
        else:
            body = FieldDataIn(**(await request.json()))
            records = [_record_from(doc) for doc in body.records]
            row_errors = []

        def step(project):
            updated = []
            for record in records:
                project, b = ingest.ingest_field_data(project, record)
                updated.append(b.id)
            return project, updated

        project, updated = mutate(pid, step)
        return {
            "schema_version": SCHEMA_VERSION,
            "updated": updated,
            "row_errors": [dataclasses.asdict(e) for e in row_errors],
            "stale": project.stale,
        }

    # --- scenarios / propagation / recompute ----------------------------------------

    @app.get("/projects/{pid}/scenarios")
    def scenarios_index(pid: str):
        project = store.load_project(root, pid)
        return {"schema_version": SCHEMA_VERSION,
                "scenarios": [scenario_view(s) for s in project.scenarios]}

    @app.post("/projects/{pid}/scenarios", status_code=201)
    def scenarios_create(pid: str, body: ScenarioIn):
        meta = ScenarioMeta(**body.meta) if body.meta else None

        def step(project):
            return risk.define_scenario(project, ag=body.ag, name=body.name, meta=meta)

        _, scenario = mutate(pid, step)
        return scenario_view(scenario)

    @app.post("/projects/{pid}/scenarios/{sid}/run")
    def scenarios_rerun(pid: str, sid: str):
        def step(project):
            return risk.run_scenario(project, sid)

        _, scenario = mutate(pid, step)
        return scenario_view(scenario)

    @app.post("/projects/{pid}/propagate")
    def propagate(pid: str):
        def step(project):
            return typology.propagate_vi(project)

        _, report = mutate(pid, step)
        return {
            "schema_version": SCHEMA_VERSION,
            "means": dict(report.means),
            "updated": {tid: list(ids) for tid, ids in report.updated.items()},
            "without_survey": list(report.without_survey),
        }

    @app.post("/projects/{pid}/recompute")
    def recompute_all(pid: str):
        def step(project):
            return pipeline.recompute(project), None

        project, _ = mutate(pid, step)
        return project_view(project)

    # --- buildings / maps / cartography ----------------------------------------------

    @app.get("/projects/{pid}/buildings")
    def buildings_index(
        pid: str,
        ids: Optional[str] = None,
        survey_kind: Optional[str] = None,
        edited: Optional[bool] = None,
        typology_id: Optional[str] = None,
        vuln_level: Optional[str] = None,
    ):
        project = store.load_project(root, pid)
        id_set = None
        if ids:
            try:
                id_set = frozenset(int(x) for x in ids.split(",") if x.strip())
            except ValueError:
                raise err.InvalidRequest(f"ids must be integers: {ids!r}") from None
        criteria = geo.BuildingFilter(
            ids=id_set, survey_kind=survey_kind, edited=edited,
            typology_id=typology_id, vuln_level=vuln_level)
        result = geo.filter_buildings(project, criteria)
        return {
            "schema_version": SCHEMA_VERSION,
            "total": result.total,
            "count": result.count,
            "buildings": [building_view(b) for b in result.buildings],
        }

    @app.get("/projects/{pid}/maps")
    def maps(pid: str, metric: str, granularity: str, scenario: Optional[str] = None):
        project = store.load_project(root, pid)
        try:
            m = geo.Metric(metric)
            g = geo.Granularity(granularity)
        except ValueError as exc:
            raise err.InvalidRequest(str(exc)) from None
        collection = geo.export_map(project, m, g, scenario)
        return Response(content=geo.geojson_bytes(collection),
                        media_type="application/geo+json")

    @app.post("/projects/{pid}/cartography")
    async def cartography(pid: str, kind: str, key_property: str, request: Request):
        try:
            layer_kind = LayerKind(kind)
        except ValueError:
            raise err.InvalidRequest(f"kind must be one of {[k.value for k in LayerKind]}") from None
        payload = (await request.body()).decode("utf-8", errors="replace")

        def step(project):
            return ingest.load_cartography(project, payload, layer_kind, key_property)

        _, report = mutate(pid, step)
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": report.kind,
            "missing_in_layer": list(report.missing_in_layer),
            "missing_in_buildings": list(report.missing_in_buildings),
        }

    # --- state / scale ------------------------------------------------------------------

    @app.post("/projects/{pid}/state")
    def state_change(pid: str, body: StateIn):
        try:
            target = ProjectState[body.target]
        except KeyError:
            raise err.IllegalTransition("?", body.target) from None

        def step(project):
            return pipeline.advance_project(project, target), None

        project, _ = mutate(pid, step)
        return project_view(project)

    @app.get("/projects/{pid}/scale")
    def scale_show(pid: str):
        return scale_view(store.load_project(root, pid))

    @app.put("/projects/{pid}/scale")
    def scale_set(pid: str, body: ScaleIn):
        rows = tuple(
            ScaleRow(name=r.get("name", f"param {i}"),
                     k={c: float(v) for c, v in r["k"].items()},
                     w=float(r["w"]))
            for i, r in enumerate(body.rows, start=1)
        )

        def step(project):
            return pipeline.set_scale(project, VulnerabilityScale(rows=rows)), None

        project, _ = mutate(pid, step)
        return scale_view(project)

    @app.put("/projects/{pid}/thresholds")
    def thresholds_set(pid: str, body: ThresholdsIn):
        def step(project):
            vuln = tuple(body.vuln_thresholds) if body.vuln_thresholds else None
            damage = tuple(body.damage_thresholds) if body.damage_thresholds else None
            try:
                return pipeline.set_thresholds(project, vuln, damage), None
            except ValueError as exc:
                raise err.BadBandConfig(str(exc)) from None

        project, _ = mutate(pid, step)
        return project_view(project)

    return app


def serve(bind: str, root: Path | str) -> None:
    """Run the service (blocking). ``bind`` is host:port."""
    import uvicorn

    host, _, port = bind.partition(":")
    try:
        uvicorn.run(create_app(root), host=host or "127.0.0.1", port=int(port or 8000))
    except OSError as exc:
        raise err.IoFailure(f"cannot bind {bind}: {exc}") from exc
