"""Batch command-line interface; verbs mirror the HTTP endpoints."""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import forms, geo, ingest, pipeline, risk, store, typology
from .domain import LayerKind, ProjectState, ScaleRow, SubTypologyKey, VulnerabilityScale
from .errors import VulnesisError
from .typology import SampleMode, SampleSpec

ROOT_OPTION = click.option(
    "--root", envvar="VULNESIS_ROOT", required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="projects root directory (or VULNESIS_ROOT)")
PROJECT_OPTION = click.option("--project", "pid", required=True, help="project id")


def echo_json(payload) -> None:
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


def _load(root: Path, pid: str):
    return store.load_project(root, pid)


def _commit(project, root: Path) -> None:
    store.save_project(project, root)


@click.group()
def main():
    """Seismic vulnerability workbench."""


@main.command()
@ROOT_OPTION
@click.argument("name")
@click.option("--description", default="")
@click.option("--author", default="")
@click.option("--id", "project_id", default=None)
@click.option("--cutoff-year", default=1972, type=int)
def create(root, name, description, author, project_id, cutoff_year):
    """Create a new project."""
    system = store.load_system_masters(root)
    project = pipeline.create_project(
        name, system, project_id=project_id, description=description,
        author=author, cutoff_year=cutoff_year)
    _commit(project, root)
    echo_json({"id": project.id, "state": project.state.name})


@main.command()
@ROOT_OPTION
def projects(root):
    """List the project inventory."""
    entries, problems = store.list_projects(root)
    echo_json({
        "projects": [dataclasses.asdict(e) for e in entries],
        "errors": [dataclasses.asdict(e) for e in problems],
    })


@main.command("import-cadastre")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--map", "mapping", multiple=True, metavar="LOGICAL=ACTUAL",
              help="column mapping overrides")
def import_cadastre(root, pid, csv_file, mapping):
    """Attach a cadastre CSV to a project in state Created."""
    colmap = dict(item.split("=", 1) for item in mapping) if mapping else None
    rows, row_errors = ingest.parse_cadastre(csv_file.read_text(encoding="utf-8"), colmap)
    project = ingest.attach_cadastre(_load(root, pid), rows)
    _commit(project, root)
    echo_json({
        "attached": len(rows),
        "row_errors": [dataclasses.asdict(e) for e in row_errors],
    })


@main.group()
def types():
    """Inspect and edit the type masters."""


@types.command("show")
@ROOT_OPTION
@PROJECT_OPTION
def types_show(root, pid):
    project = _load(root, pid)
    discovered = ingest.discover_types(project.cadastral_buildings())
    report = ingest.reconcile_types(discovered, project.masters)
    echo_json({
        "discovered": discovered,
        "unmatched": {c: list(v) for c, v in report.unmatched.items()},
    })


@types.command("register")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("category")
@click.argument("code")
@click.argument("label")
def types_register(root, pid, category, code, label):
    system = store.load_system_masters(root)
    project, system = pipeline.register_type(_load(root, pid), system, category, code, label)
    _commit(project, root)
    store.save_system_masters(system, root)
    echo_json({"registered": code})


@types.command("alias")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("category")
@click.argument("alias")
@click.argument("code")
def types_alias(root, pid, category, alias, code):
    system = store.load_system_masters(root)
    project, system = pipeline.add_alias(_load(root, pid), system, category, alias, code)
    _commit(project, root)
    store.save_system_masters(system, root)
    echo_json({"alias": alias, "code": code})


@main.group("typology")
def typology_cmd():
    """Typology management."""


@typology_cmd.command("create")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("name")
@click.option("--description", default="")
def typology_create(root, pid, name, description):
    system = store.load_system_masters(root)
    project, system, t = typology.create_typology(_load(root, pid), system, name, description)
    _commit(project, root)
    store.save_system_masters(system, root)
    echo_json({"id": t.id, "name": t.name})


@typology_cmd.command("import")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("master_id")
def typology_import(root, pid, master_id):
    system = store.load_system_masters(root)
    project, t = typology.import_master_typology(_load(root, pid), system, master_id)
    _commit(project, root)
    echo_json({"id": t.id, "name": t.name})


@typology_cmd.command("delete")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("typology_id")
def typology_delete(root, pid, typology_id):
    project = typology.delete_typology(_load(root, pid), typology_id)
    _commit(project, root)
    echo_json({"deleted": typology_id})


@typology_cmd.command("assign")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("typology_id")
@click.argument("keys", nargs=-1, required=True)
def typology_assign(root, pid, typology_id, keys):
    parsed = [SubTypologyKey.from_label(k) for k in keys]
    project, t = typology.assign_subtypologies(_load(root, pid), typology_id, parsed)
    _commit(project, root)
    echo_json({"id": t.id, "keys": sorted(k.label() for k in t.subtypology_keys)})


@typology_cmd.command("unassign")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("typology_id")
@click.argument("keys", nargs=-1, required=True)
def typology_unassign(root, pid, typology_id, keys):
    parsed = [SubTypologyKey.from_label(k) for k in keys]
    project, t = typology.unassign_subtypologies(_load(root, pid), typology_id, parsed)
    _commit(project, root)
    echo_json({"id": t.id, "keys": sorted(k.label() for k in t.subtypology_keys)})


@typology_cmd.command("list")
@ROOT_OPTION
@PROJECT_OPTION
def typology_list(root, pid):
    project = _load(root, pid)
    out = []
    for t in project.typologies:
        stats = typology.typology_stats(project, t.id)
        out.append({
            "id": t.id, "name": t.name, "count": stats.count,
            "surveyed": stats.surveyed, "avg_vi_norm": stats.avg_vi_norm,
            "total_vi": stats.total_vi, "level": stats.level,
        })
    echo_json({
        "typologies": out,
        "unassigned_keys": sorted(k.label() for k in project.unassigned_keys()),
    })


@main.command("sample")
@ROOT_OPTION
@PROJECT_OPTION
@click.option("--mode", type=click.Choice([m.value for m in SampleMode]), required=True)
@click.option("--amount", type=float, default=None, help="single count/percent value")
@click.option("--per", "per_typology", multiple=True, metavar="TID=VALUE",
              help="per-typology values")
@click.option("--seed", type=int, default=0)
def sample_cmd(root, pid, mode, amount, per_typology, seed):
    """Select survey buildings (advances the workflow to Sampled)."""
    if per_typology:
        value = {tid: float(v) for tid, v in (item.split("=", 1) for item in per_typology)}
    else:
        value = amount
    spec = SampleSpec(mode=SampleMode(mode), amount=value, seed=seed)
    project, report = typology.sample(_load(root, pid), spec)
    _commit(project, root)
    echo_json({
        "seed": report.seed,
        "rng_id": report.rng_id,
        "by_typology": {tid: list(ids) for tid, ids in report.by_typology.items()},
    })


@main.command("forms")
@ROOT_OPTION
@PROJECT_OPTION
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
def forms_cmd(root, pid, out_dir):
    """Write the field-work CSV reports (buildings table + survey sheets)."""
    documents = forms.export_field_forms(_load(root, pid))
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, text in documents.items():
        path = out_dir / f"{name}.csv"
        path.write_text(text, encoding="utf-8")
        paths[name] = str(path)
    echo_json(paths)


@main.command("field-data")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def field_data(root, pid, csv_file):
    """Upload a field-data CSV batch."""
    records, row_errors = ingest.parse_field_csv(csv_file.read_text(encoding="utf-8"))
    project = _load(root, pid)
    updated = []
    for record in records:
        project, b = ingest.ingest_field_data(project, record)
        updated.append(b.id)
    _commit(project, root)
    echo_json({
        "updated": updated,
        "row_errors": [dataclasses.asdict(e) for e in row_errors],
        "stale": project.stale,
    })


@main.group()
def scenario():
    """Earthquake what-if scenarios."""


@scenario.command("add")
@ROOT_OPTION
@PROJECT_OPTION
@click.option("--ag", type=float, required=True, help="horizontal acceleration / g")
@click.option("--name", default="")
def scenario_add(root, pid, ag, name):
    project, s = risk.define_scenario(_load(root, pid), ag=ag, name=name)
    _commit(project, root)
    echo_json({"id": s.id, "ag": s.ag, "damages": len(s.damages)})


@scenario.command("run")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("scenario_id")
def scenario_run(root, pid, scenario_id):
    project, s = risk.run_scenario(_load(root, pid), scenario_id)
    _commit(project, root)
    echo_json({"id": s.id, "damages": len(s.damages)})


@scenario.command("list")
@ROOT_OPTION
@PROJECT_OPTION
def scenario_list(root, pid):
    project = _load(root, pid)
    echo_json({"scenarios": [
        {"id": s.id, "name": s.name, "ag": s.ag, "damages": len(s.damages)}
        for s in project.scenarios
    ]})


@main.command("propagate")
@ROOT_OPTION
@PROJECT_OPTION
def propagate_cmd(root, pid):
    """Fill unsurveyed buildings with their typology mean."""
    project, report = typology.propagate_vi(_load(root, pid))
    _commit(project, root)
    echo_json({
        "means": dict(report.means),
        "updated": {tid: len(ids) for tid, ids in report.updated.items()},
        "without_survey": list(report.without_survey),
    })


@main.command("map")
@ROOT_OPTION
@PROJECT_OPTION
@click.option("--metric", type=click.Choice([m.value for m in geo.Metric]), required=True)
@click.option("--granularity", type=click.Choice([g.value for g in geo.Granularity]),
              required=True)
@click.option("--scenario", "scenario_id", default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def map_cmd(root, pid, metric, granularity, scenario_id, out):
    """Export a thematic GeoJSON map."""
    project = _load(root, pid)
    collection = geo.export_map(
        project, geo.Metric(metric), geo.Granularity(granularity), scenario_id,
        destination=out)
    if out is None:
        sys.stdout.write(geo.geojson_bytes(collection).decode("utf-8"))
    else:
        echo_json({"written": str(out), "features": len(collection["features"])})


@main.command("state")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("target", type=click.Choice([s.name for s in ProjectState]))
def state_cmd(root, pid, target):
    """Advance the project workflow."""
    project = pipeline.advance_project(_load(root, pid), ProjectState[target])
    _commit(project, root)
    echo_json({"state": project.state.name})


@main.command("cartography")
@ROOT_OPTION
@PROJECT_OPTION
@click.option("--kind", type=click.Choice([k.value for k in LayerKind]), required=True)
@click.option("--key-property", default="key")
@click.argument("geojson_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def cartography_cmd(root, pid, kind, key_property, geojson_file):
    """Load a parcel/block/project-area polygon layer."""
    project, report = ingest.load_cartography(
        _load(root, pid), geojson_file.read_text(encoding="utf-8"),
        LayerKind(kind), key_property)
    _commit(project, root)
    echo_json({
        "kind": report.kind,
        "missing_in_layer": list(report.missing_in_layer),
        "missing_in_buildings": list(report.missing_in_buildings),
    })


@main.group()
def scale():
    """Inspect or replace the vulnerability scale."""


@scale.command("show")
@ROOT_OPTION
@PROJECT_OPTION
def scale_show(root, pid):
    project = _load(root, pid)
    echo_json({
        "rows": [{"name": r.name, "k": dict(r.k), "w": r.w} for r in project.scale.rows],
        "max_vi": project.scale.max_vi(),
        "stale": project.stale,
    })


@scale.command("set")
@ROOT_OPTION
@PROJECT_OPTION
@click.argument("json_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def scale_set(root, pid, json_file):
    """Replace the scale from a JSON file: {"rows": [{name, k, w}, ...]}."""
    doc = json.loads(json_file.read_text(encoding="utf-8"))
    rows = tuple(
        ScaleRow(name=r.get("name", f"param {i}"),
                 k={c: float(v) for c, v in r["k"].items()}, w=float(r["w"]))
        for i, r in enumerate(doc["rows"], start=1))
    project = pipeline.set_scale(_load(root, pid), VulnerabilityScale(rows=rows))
    _commit(project, root)
    echo_json({"max_vi": project.scale.max_vi(), "stale": project.stale})


@main.command("recompute")
@ROOT_OPTION
@PROJECT_OPTION
def recompute_cmd(root, pid):
    """Recompute indices, propagation and scenarios; clears the stale flag."""
    project = pipeline.recompute(_load(root, pid))
    _commit(project, root)
    echo_json({"stale": project.stale, "scenarios": len(project.scenarios)})


@main.command("serve")
@ROOT_OPTION
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
def serve_cmd(root, bind):
    """Run the HTTP service."""
    from .api import serve

    serve(bind, root)


def run() -> int:
    try:
        main(standalone_mode=False)
        return 0
    except VulnesisError as exc:
        click.echo(json.dumps({"error": exc.code, "message": str(exc)}), err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 130


if __name__ == "__main__":
    sys.exit(run())
