"""Versioned on-disk persistence.

One directory per project: project.json, buildings.jsonl (one document per
building with a "kind" discriminator for the cadastral/independent hierarchy),
typologies.json, scenarios.json, masters.json, cartography/<kind>.geojson.
System-wide masters live at <root>/masters.json.

Serialization is stable (sorted keys, buildings by id) so re-saving an
unchanged project is byte-identical. Writes go through a temp file + rename
and require the per-project lock file.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .domain import (
    Building,
    BuildingKind,
    CadastralKey,
    DamageEntry,
    LayerKind,
    MapLayer,
    Project,
    ProjectState,
    ScaleRow,
    Scenario,
    ScenarioMeta,
    SubTypologyKey,
    SurveyRecord,
    SystemMasters,
    TypeEntry,
    TypeMasters,
    Typology,
    TypologyMasterEntry,
    ViSource,
    VulnerabilityScale,
)
from .errors import CorruptFile, IoFailure, LockHeld, SchemaTooNew, UnknownKind, UnknownProject
from .typology import typology_stats

log = logging.getLogger("vulnesis.store")

SCHEMA_VERSION = 1

PROJECT_FILE = "project.json"
BUILDINGS_FILE = "buildings.jsonl"
TYPOLOGIES_FILE = "typologies.json"
SCENARIOS_FILE = "scenarios.json"
MASTERS_FILE = "masters.json"
CARTOGRAPHY_DIR = "cartography"
LOCK_FILE = ".lock"


# --- value <-> document conversion ---------------------------------------------

def _scale_doc(scale: VulnerabilityScale) -> list[dict]:
    return [{"name": r.name, "k": dict(r.k), "w": r.w} for r in scale.rows]


def _scale_from(doc: list[dict]) -> VulnerabilityScale:
    return VulnerabilityScale(rows=tuple(
        ScaleRow(name=r["name"], k={c: float(v) for c, v in r["k"].items()}, w=float(r["w"]))
        for r in doc
    ))


def _masters_doc(masters: TypeMasters) -> dict:
    return {
        category: [
            {"code": e.code, "label": e.label, "aliases": sorted(e.aliases)}
            for e in masters.entries(category)
        ]
        for category in sorted(masters.categories)
    }


def _masters_from(doc: Mapping[str, Any]) -> TypeMasters:
    return TypeMasters(categories={
        category: tuple(
            TypeEntry(code=e["code"], label=e.get("label", ""),
                      aliases=frozenset(e.get("aliases", ())))
            for e in entries
        )
        for category, entries in doc.items()
    })


_PROJECT_KEYS = {
    "schema_version", "id", "name", "description", "author", "date", "state",
    "cutoff_year", "vuln_thresholds", "damage_thresholds", "stale", "stale_reason",
    "rng_id", "scale", "masters",
}


def _project_doc(project: Project) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": project.id,
        "name": project.name,
        "description": project.description,
        "author": project.author,
        "date": project.date,
        "state": project.state.name,
        "cutoff_year": project.cutoff_year,
        "vuln_thresholds": list(project.vuln_thresholds),
        "damage_thresholds": list(project.damage_thresholds),
        "stale": project.stale,
        "stale_reason": project.stale_reason,
        "rng_id": project.rng_id,
        "scale": _scale_doc(project.scale),
        "masters": _masters_doc(project.masters),
    }
    doc.update({k: v for k, v in project.extra.items() if k not in doc})
    return doc


_BUILDING_KEYS = {
    "schema_version", "kind", "id", "cadastral_key", "wall_type", "roof_type",
    "use_type", "state_type", "construction_year", "subtypology", "typology_id",
    "selected_for_survey", "surveyed", "edited", "coord", "photo_id", "survey",
    "vi", "vi_norm", "vi_source",
}


def _building_doc(b: Building) -> dict:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "kind": b.kind.value,
        "id": b.id,
        "wall_type": b.wall_type,
        "roof_type": b.roof_type,
        "use_type": b.use_type,
        "state_type": b.state_type,
        "construction_year": b.construction_year,
        "selected_for_survey": b.selected_for_survey,
        "surveyed": b.surveyed,
        "edited": b.edited,
        "coord": list(b.coord) if b.coord else None,
        "photo_id": b.photo_id,
        "vi": b.vi,
        "vi_norm": b.vi_norm,
        "vi_source": b.vi_source.value,
    }
    if b.kind is BuildingKind.Cadastral:
        doc["cadastral_key"] = list(b.cadastral_key.parts())
        doc["subtypology"] = b.subtypology.label() if b.subtypology else None
        doc["typology_id"] = b.typology_id
    if b.survey is not None:
        doc["survey"] = {
            "classes": "".join(b.survey.classes),
            "raw": dict(sorted(b.survey.raw.items())),
            "observer_id": b.survey.observer_id,
            "date": b.survey.date,
        }
    doc.update({k: v for k, v in b.extra.items() if k not in doc})
    return doc


def _building_from(doc: Mapping[str, Any], position: str) -> Building:
    kind_raw = doc.get("kind")
    try:
        kind = BuildingKind(kind_raw)
    except ValueError:
        raise UnknownKind(f"building discriminator {kind_raw!r} at {position}") from None
    survey = None
    if doc.get("survey"):
        s = doc["survey"]
        survey = SurveyRecord(
            classes=tuple(s["classes"]),
            raw={k: float(v) for k, v in s.get("raw", {}).items()},
            observer_id=s.get("observer_id", ""),
            date=s.get("date", ""),
        )
    extra = {k: v for k, v in doc.items() if k not in _BUILDING_KEYS}
    common = dict(
        id=int(doc["id"]),
        kind=kind,
        wall_type=doc.get("wall_type", ""),
        roof_type=doc.get("roof_type", ""),
        use_type=doc.get("use_type", ""),
        state_type=doc.get("state_type", ""),
        construction_year=doc.get("construction_year"),
        selected_for_survey=bool(doc.get("selected_for_survey", False)),
        surveyed=bool(doc.get("surveyed", False)),
        edited=bool(doc.get("edited", False)),
        coord=tuple(doc["coord"]) if doc.get("coord") else None,
        photo_id=doc.get("photo_id"),
        survey=survey,
        vi=doc.get("vi"),
        vi_norm=doc.get("vi_norm"),
        vi_source=ViSource(doc.get("vi_source", "None")),
        extra=extra,
    )
    if kind is BuildingKind.Cadastral:
        key = doc.get("cadastral_key") or []
        sub = doc.get("subtypology")
        return Building(
            cadastral_key=CadastralKey(*key),
            subtypology=SubTypologyKey.from_label(sub) if sub else None,
            typology_id=doc.get("typology_id"),
            **common,
        )
    return Building(**common)


def _typologies_doc(project: Project) -> dict:
    out = []
    for t in project.typologies:
        stats = typology_stats(project, t.id)
        entry = {
            "id": t.id,
            "name": t.name,
            "description": t.description,
            "subtypology_keys": sorted(k.label() for k in t.subtypology_keys),
            "sample_quota": t.sample_quota,
            "stats": {
                "count": stats.count,
                "surveyed": stats.surveyed,
                "avg_vi_norm": stats.avg_vi_norm,
                "total_vi": stats.total_vi,
                "level": stats.level,
            },
        }
        entry.update({k: v for k, v in t.extra.items() if k not in entry})
        out.append(entry)
    return {"schema_version": SCHEMA_VERSION, "typologies": out}


_TYPOLOGY_KEYS = {"id", "name", "description", "subtypology_keys", "sample_quota", "stats"}


def _typology_from(doc: Mapping[str, Any]) -> Typology:
    return Typology(
        id=doc["id"],
        name=doc["name"],
        description=doc.get("description", ""),
        subtypology_keys=frozenset(
            SubTypologyKey.from_label(s) for s in doc.get("subtypology_keys", ())),
        sample_quota=doc.get("sample_quota"),
        extra={k: v for k, v in doc.items() if k not in _TYPOLOGY_KEYS},
    )


def _scenarios_doc(project: Project) -> dict:
    out = []
    for s in project.scenarios:
        entry: dict[str, Any] = {
            "id": s.id,
            "name": s.name,
            "ag": s.ag,
            "meta": dataclasses.asdict(s.meta) if s.meta else None,
            "damages": {
                str(bid): {"d": e.d, "level": e.level}
                for bid, e in sorted(s.damages.items())
            },
        }
        entry.update({k: v for k, v in s.extra.items() if k not in entry})
        out.append(entry)
    return {"schema_version": SCHEMA_VERSION, "scenarios": out}


_SCENARIO_KEYS = {"id", "name", "ag", "meta", "damages"}


def _scenario_from(doc: Mapping[str, Any]) -> Scenario:
    meta = ScenarioMeta(**doc["meta"]) if doc.get("meta") else None
    return Scenario(
        id=doc["id"],
        name=doc.get("name", ""),
        ag=float(doc["ag"]),
        meta=meta,
        damages={
            int(bid): DamageEntry(d=float(e["d"]), level=e["level"])
            for bid, e in doc.get("damages", {}).items()
        },
        extra={k: v for k, v in doc.items() if k not in _SCENARIO_KEYS},
    )


def _layer_doc(layer: MapLayer) -> dict:
    features = []
    for f in layer.features:
        geometry = f.source_geometry or {
            "type": "Polygon",
            "coordinates": [[list(p) for p in ring] for ring in f.rings],
        }
        features.append({
            "type": "Feature",
            "properties": {"key": f.key},
            "geometry": geometry,
        })
    return {
        "type": "FeatureCollection",
        "schema_version": SCHEMA_VERSION,
        "features": features,
    }


def _layer_from(doc: Mapping[str, Any], kind: LayerKind) -> MapLayer:
    from .ingest import load_cartography  # local import to avoid a cycle

    project_stub = Project(id="_", name="_")
    loaded, _ = load_cartography(project_stub, doc, kind, "key")
    return loaded.layer(kind)


# --- file plumbing ---------------------------------------------------------------

def _dump(doc: Any) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(path.name, f"line {exc.lineno} column {exc.colno}", exc.msg) from exc


def _check_version(doc: Mapping[str, Any], path: Path) -> None:
    version = doc.get("schema_version")
    if not isinstance(version, int):
        raise CorruptFile(path.name, "schema_version", "missing or non-integer")
    if version > SCHEMA_VERSION:
        raise SchemaTooNew(version, SCHEMA_VERSION)


@contextmanager
def project_lock(root: Path | str, project_id: str):
    """Advisory single-writer lock: <root>/<id>/.lock, exclusive creation."""
    directory = Path(root) / project_id
    directory.mkdir(parents=True, exist_ok=True)
    lock_path = directory / LOCK_FILE
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockHeld(f"project {project_id} is locked by another writer") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            lock_path.unlink()
        except OSError:  # pragma: no cover - cleanup best effort
            pass


# --- public API --------------------------------------------------------------------

def save_project(project: Project, root: Path | str) -> Path:
    """Write the project directory atomically; requires the project lock."""
    directory = Path(root) / project.id
    with project_lock(root, project.id):
        (directory / CARTOGRAPHY_DIR).mkdir(parents=True, exist_ok=True)
        _write_atomic(directory / PROJECT_FILE, _dump(_project_doc(project)))
        lines = [
            json.dumps(_building_doc(project.buildings[bid]), sort_keys=True)
            for bid in sorted(project.buildings)
        ]
        _write_atomic(directory / BUILDINGS_FILE,
                      ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))
        _write_atomic(directory / TYPOLOGIES_FILE, _dump(_typologies_doc(project)))
        _write_atomic(directory / SCENARIOS_FILE, _dump(_scenarios_doc(project)))
        _write_atomic(directory / MASTERS_FILE, _dump({
            "schema_version": SCHEMA_VERSION,
            "scope": "project",
            "types": _masters_doc(project.masters),
        }))
        for kind_name, layer in sorted(project.layers.items()):
            _write_atomic(directory / CARTOGRAPHY_DIR / f"{kind_name}.geojson",
                          _dump(_layer_doc(layer)))
    log.info("saved project %s (%d buildings)", project.id, len(project.buildings))
    return directory


def load_project(root: Path | str, project_id: str) -> Project:
    directory = Path(root) / project_id
    if not (directory / PROJECT_FILE).exists():
        raise UnknownProject(f"no project directory at {directory}")

    doc = _read_json(directory / PROJECT_FILE)
    _check_version(doc, directory / PROJECT_FILE)
    extra = {k: v for k, v in doc.items() if k not in _PROJECT_KEYS}
    project = Project(
        id=doc["id"],
        name=doc["name"],
        description=doc.get("description", ""),
        author=doc.get("author", ""),
        date=doc.get("date", ""),
        state=ProjectState[doc["state"]],
        scale=_scale_from(doc["scale"]),
        cutoff_year=int(doc.get("cutoff_year", 1972)),
        vuln_thresholds=tuple(doc["vuln_thresholds"]),
        damage_thresholds=tuple(doc["damage_thresholds"]),
        stale=bool(doc.get("stale", False)),
        stale_reason=doc.get("stale_reason", ""),
        rng_id=doc.get("rng_id", "python-random-mt19937"),
        masters=_masters_from(doc.get("masters", {})),
        extra=extra,
    )

    buildings = []
    buildings_path = directory / BUILDINGS_FILE
    if buildings_path.exists():
        try:
            text = buildings_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read {buildings_path}: {exc}") from exc
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                bdoc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptFile(BUILDINGS_FILE, f"line {n}", exc.msg) from exc
            _check_version(bdoc, buildings_path)
            buildings.append(_building_from(bdoc, f"line {n}"))
    project = project.with_buildings(buildings)

    tdoc = _read_json(directory / TYPOLOGIES_FILE)
    _check_version(tdoc, directory / TYPOLOGIES_FILE)
    project = dataclasses.replace(project, typologies=tuple(
        _typology_from(t) for t in tdoc.get("typologies", ())))

    sdoc = _read_json(directory / SCENARIOS_FILE)
    _check_version(sdoc, directory / SCENARIOS_FILE)
    project = dataclasses.replace(project, scenarios=tuple(
        _scenario_from(s) for s in sdoc.get("scenarios", ())))

    cart_dir = directory / CARTOGRAPHY_DIR
    if cart_dir.is_dir():
        for kind in LayerKind:
            path = cart_dir / f"{kind.value}.geojson"
            if path.exists():
                ldoc = _read_json(path)
                _check_version(ldoc, path)
                project = project.with_layer(_layer_from(ldoc, kind))
    return project


@dataclass(frozen=True)
class InventoryEntry:
    id: str
    name: str
    state: str
    date: str


@dataclass(frozen=True)
class InventoryError:
    id: str
    error: str


def list_projects(root: Path | str) -> tuple[list[InventoryEntry], list[InventoryError]]:
    """One entry per loadable project directory; corrupt ones become error records."""
    root = Path(root)
    entries: list[InventoryEntry] = []
    problems: list[InventoryError] = []
    if not root.is_dir():
        return entries, problems
    for child in sorted(root.iterdir()):
        if not child.is_dir() or not (child / PROJECT_FILE).exists():
            continue
        try:
            doc = _read_json(child / PROJECT_FILE)
            _check_version(doc, child / PROJECT_FILE)
            entries.append(InventoryEntry(
                id=doc["id"], name=doc.get("name", ""),
                state=doc.get("state", ""), date=doc.get("date", "")))
        except Exception as exc:  # corrupt directories are reported, not skipped
            problems.append(InventoryError(id=child.name, error=str(exc)))
    return entries, problems


# --- system-level masters -------------------------------------------------------

def load_system_masters(root: Path | str) -> SystemMasters:
    path = Path(root) / MASTERS_FILE
    if not path.exists():
        return SystemMasters()
    doc = _read_json(path)
    _check_version(doc, path)
    return SystemMasters(
        types=_masters_from(doc.get("types", {})),
        typologies=tuple(
            TypologyMasterEntry(id=t["id"], name=t["name"],
                                description=t.get("description", ""))
            for t in doc.get("typologies", ())
        ),
    )


def save_system_masters(masters: SystemMasters, root: Path | str) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    _write_atomic(root / MASTERS_FILE, _dump({
        "schema_version": SCHEMA_VERSION,
        "scope": "system",
        "types": _masters_doc(masters.types),
        "typologies": [
            {"id": t.id, "name": t.name, "description": t.description}
            for t in masters.typologies
        ],
    }))
