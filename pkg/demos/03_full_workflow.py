"""The whole desk workflow on a small synthetic neighborhood.

Cadastre ingestion, type reconciliation, subtypology discovery, typology
definition, seeded sampling, field-data upload with immediate index
computation, propagation of typology means, an earthquake scenario, and
choropleth GeoJSON export, persisting the project between steps.

Run:  python3 demos/03_full_workflow.py
"""

import json
import random
import tempfile
from pathlib import Path

from vulnesis import (
    FieldRecord,
    LayerKind,
    ProjectState,
    SampleMode,
    SampleSpec,
    SystemMasters,
    advance_project,
    assign_subtypologies,
    attach_cadastre,
    create_project,
    create_typology,
    define_scenario,
    export_map,
    ingest_field_data,
    load_cartography,
    load_project,
    parse_cadastre,
    propagate_vi,
    sample,
    save_project,
)
from vulnesis.geo import Granularity, Metric
from vulnesis.pipeline import register_type

root = Path(tempfile.mkdtemp(prefix="vulnesis-demo-"))
print(f"project root: {root}")

# --- 1. create the project and attach a synthetic cadastre table ------------
rng = random.Random(7)
lines = ["dep,centro,distrito,manzana,lote,edificacion,pared,techo,uso,estado,anio"]
for i in range(60):
    lines.append(",".join((
        "10", "03", "D1", f"M{i // 6:02d}", f"{i % 6:03d}", "01",
        rng.choice(("BLOQUE", "MADERA")), rng.choice(("ZINC", "TEJA")),
        "VIVIENDA", rng.choice(("BUENO", "MALO")), str(rng.choice((1960, 1985))),
    )))

system = SystemMasters()
project = create_project("Barrio demo", system, project_id="demo", author="demo script")
rows, errors = parse_cadastre("\n".join(lines) + "\n")
project = attach_cadastre(project, rows)
print(f"ingested {len(rows)} buildings ({len(errors)} row errors)")

# --- 2. register the type masters and reconcile -------------------------------
for category, codes in (("Wall", ("BLOQUE", "MADERA")), ("Roof", ("ZINC", "TEJA")),
                        ("Use", ("VIVIENDA",)), ("State", ("BUENO", "MALO"))):
    for code in codes:
        project, system = register_type(project, system, category, code, code.title())
project = advance_project(project, ProjectState.TypesReconciled)
print(f"discovered {len(project.discovered_keys())} subtypologies")

# --- 3. typologies and a 25% seeded sample ------------------------------------
for wall in ("BLOQUE", "MADERA"):
    project, system, typ = create_typology(project, system, f"Casas {wall.title()}")
    keys = sorted((k for k in project.unassigned_keys() if k.wall_type == wall),
                  key=lambda k: k.label())
    project, _ = assign_subtypologies(project, typ.id, keys)
project = advance_project(project, ProjectState.TypologiesDefined)
project, selection = sample(project, SampleSpec(SampleMode.PerTypologyPercent, 25, seed=99))
print(f"sampled {len(selection.selected)} buildings for survey: {selection.selected}")

# --- 4. field work: coordinates, photos and the 11 parameter classes ------------
project = advance_project(project, ProjectState.FieldWork)
for bid in selection.selected:
    block = int(project.building(bid).cadastral_key.manzana[1:])
    record = FieldRecord(
        building_id=bid,
        x=block * 2.0 + rng.uniform(-0.4, 0.4),
        y=rng.uniform(-0.4, 0.4),
        photo_id=f"P{bid:04d}",
        classes=tuple(rng.choice("ABCD") for _ in range(11)),
        observer_id="crew-1",
        date="2026-08-11",
    )
    project, b = ingest_field_data(project, record)
print("surveyed indices:",
      {b.id: round(b.vi_norm, 1) for b in project.buildings.values() if b.surveyed})

# --- 5. propagate typology means to the unsurveyed houses -----------------------
project, report = propagate_vi(project)
print("typology means:", {tid: round(m, 1) for tid, m in report.means.items()})

# --- 6. an earthquake scenario and the thematic maps -----------------------------
project, scenario = define_scenario(project, ag=0.25, name="what-if M6.5 nearby")
print(f"scenario {scenario.id}: ag={scenario.ag}, {len(scenario.damages)} damages")

blocks = {"type": "FeatureCollection", "features": [{
    "type": "Feature",
    "properties": {"key": f"10-03-D1-M{i:02d}"},
    "geometry": {"type": "Polygon", "coordinates": [[
        [i * 2 - 1, -1], [i * 2 + 1, -1], [i * 2 + 1, 1], [i * 2 - 1, 1], [i * 2 - 1, -1],
    ]]},
} for i in range(10)]}
project, match = load_cartography(project, json.dumps(blocks), LayerKind.Blocks, "key")

out = root / "maps"
out.mkdir()
for metric, sid in ((Metric.Vulnerability, None), (Metric.Damage, scenario.id)):
    for granularity in (Granularity.Building, Granularity.Block):
        name = f"{metric.value}-{granularity.value}.geojson".lower()
        export_map(project, metric, granularity, sid, destination=out / name)
print(f"maps written to {out}: {sorted(p.name for p in out.iterdir())}")

# --- 7. persist and reload -----------------------------------------------------
save_project(project, root)
reloaded = load_project(root, "demo")
assert reloaded == project
print(f"saved and reloaded project {reloaded.id!r}: state={reloaded.state.name}, "
      f"{len(reloaded.buildings)} buildings")
