"""Cadastral table parsing, type reconciliation, subtypology discovery,
cartography loading and field-data ingestion.

Parsing is total: every data line becomes a row or a row-error, never an
exception. Ingestion ops are pure project-in/project-out functions.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from . import risk
from .domain import (
    RAW_FIELDS,
    TYPE_CATEGORIES,
    Building,
    BuildingKind,
    CadastralKey,
    LayerFeature,
    LayerKind,
    MapLayer,
    Project,
    ProjectState,
    SubTypologyKey,
    SurveyRecord,
    TypeEntry,
    TypeMasters,
    ViSource,
    mark_stale,
)
from .errors import (
    DuplicateCode,
    IncompleteSurvey,
    MissingColumn,
    MissingKeyProperty,
    NotAFeatureCollection,
    UnknownBuilding,
    UnknownCode,
    UnreconciledTypes,
    WrongState,
)

log = logging.getLogger("vulnesis.ingest")

#: logical column names of the cadastre CSV (also the default header names)
CADASTRE_COLUMNS = (
    "dep", "centro", "distrito", "manzana", "lote", "edificacion",
    "pared", "techo", "uso", "estado", "anio",
)

_KEY_COLUMNS = CADASTRE_COLUMNS[:6]
_TYPE_COLUMNS = {"pared": "Wall", "techo": "Roof", "uso": "Use", "estado": "State"}


@dataclass(frozen=True)
class CadastreRow:
    key: CadastralKey
    wall_type: str
    roof_type: str
    use_type: str
    state_type: str
    construction_year: int
    row_number: int


@dataclass(frozen=True)
class RowError:
    row_number: int
    reason: str


def _decode(stream: str | bytes | io.TextIOBase) -> str:
    if isinstance(stream, bytes):
        text = stream.decode("utf-8", errors="replace")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
    return text.replace("\x00", "")


def _iter_csv_lines(text: str):
    """(line_number, cells) per non-blank physical line; line 1 is the header.

    Fields never span lines in this data, so parsing one physical line at a
    time keeps the rows+errors=data-lines totality exact and the reported
    line numbers honest.
    """
    for number, line in enumerate(text.splitlines(), start=1):
        if line == "":
            continue
        try:
            cells = next(csv.reader([line]))
        except (csv.Error, StopIteration):
            cells = [line]
        yield number, cells


def parse_cadastre(
    stream: str | bytes | io.TextIOBase,
    mapping: Optional[Mapping[str, str]] = None,
) -> tuple[list[CadastreRow], list[RowError]]:
    """Parse a cadastre CSV into rows and per-line errors.

    ``mapping`` binds logical columns (see CADASTRE_COLUMNS) to actual header
    names; by default the header must use the logical names. Row numbers are
    physical line numbers (header = line 1).
    """
    text = _decode(stream)
    lines = _iter_csv_lines(text)
    try:
        _, header = next(lines)
    except StopIteration:
        header = []

    colmap = {c: c for c in CADASTRE_COLUMNS}
    if mapping:
        colmap.update(mapping)
    missing = [colmap[c] for c in CADASTRE_COLUMNS if colmap[c] not in header]
    if missing:
        raise MissingColumn(f"cadastre CSV lacks columns: {missing}")
    index = {name: i for i, name in enumerate(header)}

    rows: list[CadastreRow] = []
    errors: list[RowError] = []
    seen: set[tuple[str, ...]] = set()
    for line, cells in lines:
        def cell(logical: str) -> str:
            i = index[colmap[logical]]
            return cells[i].strip() if i < len(cells) else ""

        key_parts = tuple(cell(c) for c in _KEY_COLUMNS)
        blank_keys = [c for c, v in zip(_KEY_COLUMNS, key_parts) if not v]
        if blank_keys:
            errors.append(RowError(line, f"missing key field(s): {blank_keys}"))
            continue
        if key_parts in seen:
            errors.append(RowError(line, f"duplicate cadastral key {'-'.join(key_parts)}"))
            continue
        blank_types = [c for c in _TYPE_COLUMNS if not cell(c)]
        if blank_types:
            errors.append(RowError(line, f"missing type value(s): {blank_types}"))
            continue
        try:
            year = int(cell("anio"))
        except ValueError:
            errors.append(RowError(line, f"bad construction year {cell('anio')!r}"))
            continue
        seen.add(key_parts)
        rows.append(CadastreRow(
            key=CadastralKey(*key_parts),
            wall_type=cell("pared"),
            roof_type=cell("techo"),
            use_type=cell("uso"),
            state_type=cell("estado"),
            construction_year=year,
            row_number=line,
        ))
    return rows, errors


def attach_cadastre(project: Project, rows: Iterable[CadastreRow]) -> Project:
    """Create the building inventory from parsed cadastre rows (state Created)."""
    if project.state is not ProjectState.Created:
        raise WrongState(f"cadastre can only be attached in Created, not {project.state.name}")
    if project.buildings:
        raise WrongState("project already holds a building inventory")
    buildings = [
        Building(
            id=i,
            kind=BuildingKind.Cadastral,
            cadastral_key=row.key,
            wall_type=row.wall_type,
            roof_type=row.roof_type,
            use_type=row.use_type,
            state_type=row.state_type,
            construction_year=row.construction_year,
        )
        for i, row in enumerate(rows, start=1)
    ]
    log.info("attached %d cadastral buildings to project %s", len(buildings), project.id)
    return project.with_buildings(buildings)


def discover_types(items: Iterable[Any]) -> dict[str, dict[str, int]]:
    """Distinct raw wall/roof/use/state values with their occurrence counts."""
    out: dict[str, dict[str, int]] = {c: {} for c in TYPE_CATEGORIES}
    attr = {"Wall": "wall_type", "Roof": "roof_type", "Use": "use_type", "State": "state_type"}
    for item in items:
        for category, name in attr.items():
            value = getattr(item, name)
            out[category][value] = out[category].get(value, 0) + 1
    return out


@dataclass(frozen=True)
class ReconcileReport:
    matched: Mapping[str, Mapping[str, str]]    # category -> raw -> canonical code
    unmatched: Mapping[str, tuple[str, ...]]    # category -> raw values without a master

    def is_clean(self) -> bool:
        return not any(self.unmatched.values())


def reconcile_types(
    discovered: Mapping[str, Mapping[str, int]], masters: TypeMasters
) -> ReconcileReport:
    """Match every discovered raw value against the masters, by code or alias."""
    matched: dict[str, dict[str, str]] = {}
    unmatched: dict[str, tuple[str, ...]] = {}
    for category in TYPE_CATEGORIES:
        values = discovered.get(category, {})
        hits: dict[str, str] = {}
        misses: list[str] = []
        for raw in sorted(values):
            code = masters.resolve(category, raw)
            if code is None:
                misses.append(raw)
            else:
                hits[raw] = code
        matched[category] = hits
        unmatched[category] = tuple(misses)
    return ReconcileReport(matched=matched, unmatched=unmatched)


def register_type(masters: TypeMasters, category: str, code: str, label: str) -> TypeMasters:
    if category not in TYPE_CATEGORIES:
        raise UnknownCode(f"unknown type category {category!r}")
    code = code.strip()
    if masters.resolve(category, code) is not None:
        raise DuplicateCode(f"{category} code {code!r} already registered")
    categories = {c: tuple(masters.entries(c)) for c in TYPE_CATEGORIES}
    categories[category] = categories[category] + (TypeEntry(code=code, label=label),)
    return TypeMasters(categories=categories)


def add_alias(masters: TypeMasters, category: str, alias: str, code: str) -> TypeMasters:
    if category not in TYPE_CATEGORIES:
        raise UnknownCode(f"unknown type category {category!r}")
    entries = masters.entries(category)
    target = next((e for e in entries if e.code.casefold() == code.strip().casefold()), None)
    if target is None:
        raise UnknownCode(f"{category} code {code!r} not registered")
    existing = masters.resolve(category, alias)
    if existing is not None and existing != target.code:
        raise DuplicateCode(f"alias {alias!r} already resolves to {existing}")
    updated = dataclasses.replace(target, aliases=target.aliases | {alias.strip()})
    categories = {c: tuple(masters.entries(c)) for c in TYPE_CATEGORIES}
    categories[category] = tuple(updated if e.code == target.code else e for e in entries)
    return TypeMasters(categories=categories)


def apply_reconciliation(project: Project) -> Project:
    """Rewrite building type values to canonical master codes.

    Fails with UnreconciledTypes while any raw value lacks a master match.
    """
    cadastral = project.cadastral_buildings()
    report = reconcile_types(discover_types(cadastral), project.masters)
    if not report.is_clean():
        pending = {c: v for c, v in report.unmatched.items() if v}
        raise UnreconciledTypes(f"unmatched type values remain: {pending}")
    changed = []
    for b in cadastral:
        canon = {
            "wall_type": report.matched["Wall"][b.wall_type],
            "roof_type": report.matched["Roof"][b.roof_type],
            "use_type": report.matched["Use"][b.use_type],
            "state_type": report.matched["State"][b.state_type],
        }
        if any(getattr(b, k) != v for k, v in canon.items()):
            changed.append(dataclasses.replace(b, **canon))
    return project.with_buildings(changed)


def _subtypology_key(building: Building, cutoff_year: int) -> SubTypologyKey:
    # pre_cutoff: built strictly before the cutoff year
    return SubTypologyKey(
        wall_type=building.wall_type,
        roof_type=building.roof_type,
        use_type=building.use_type,
        state_type=building.state_type,
        pre_cutoff=(building.construction_year or 0) < cutoff_year,
    )


def discover_subtypologies(project: Project) -> tuple[Project, list[tuple[SubTypologyKey, int]]]:
    """Enumerate every type/year-band combination and tag each cadastral building.

    The resulting keys partition the cadastral inventory; counts sum to the
    cadastral building count.
    """
    cadastral = project.cadastral_buildings()
    report = reconcile_types(discover_types(cadastral), project.masters)
    if not report.is_clean():
        pending = {c: v for c, v in report.unmatched.items() if v}
        raise UnreconciledTypes(f"cannot discover subtypologies: {pending}")
    counts: dict[SubTypologyKey, int] = {}
    changed = []
    for b in cadastral:
        key = _subtypology_key(b, project.cutoff_year)
        counts[key] = counts.get(key, 0) + 1
        if b.subtypology != key:
            changed.append(dataclasses.replace(b, subtypology=key))
    ordered = sorted(counts.items(), key=lambda kv: kv[0].label())
    return project.with_buildings(changed), ordered


# --- cartography -------------------------------------------------------------

@dataclass(frozen=True)
class CartographyReport:
    kind: str
    missing_in_layer: tuple[str, ...]      # referenced by buildings, absent from layer
    missing_in_buildings: tuple[str, ...]  # present in layer, referenced by nothing


def _rings_of(geometry: Mapping[str, Any], index: int) -> tuple:
    gtype = geometry.get("type")
    if gtype == "Polygon":
        polys = [geometry.get("coordinates", [])]
    elif gtype == "MultiPolygon":
        polys = list(geometry.get("coordinates", []))
    else:
        raise NotAFeatureCollection(f"feature {index}: unsupported geometry type {gtype!r}")
    rings = []
    for poly in polys:
        for ring in poly:
            pts = [(float(x), float(y)) for x, y, *_ in ring]
            if pts and pts[0] != pts[-1]:
                pts.append(pts[0])
            if len(pts) < 4:
                raise NotAFeatureCollection(f"feature {index}: degenerate ring")
            rings.append(tuple(pts))
    return tuple(rings)


def load_cartography(
    project: Project, geojson: str | Mapping[str, Any], kind: LayerKind, key_property: str
) -> tuple[Project, CartographyReport]:
    """Store a polygon layer and report building/layer key mismatches."""
    doc = json.loads(geojson) if isinstance(geojson, str) else geojson
    if not isinstance(doc, Mapping) or doc.get("type") != "FeatureCollection":
        raise NotAFeatureCollection("input is not a GeoJSON FeatureCollection")
    features = []
    for i, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        if key_property not in props or props[key_property] in (None, ""):
            raise MissingKeyProperty(i)
        geometry = feat.get("geometry") or {}
        features.append(LayerFeature(
            key=str(props[key_property]),
            rings=_rings_of(geometry, i),
            source_geometry=geometry,
        ))
    layer = MapLayer(kind=kind, features=tuple(features))

    layer_keys = layer.keys()
    if kind is LayerKind.Blocks:
        wanted = {b.cadastral_key.block_key() for b in project.cadastral_buildings()}
    elif kind is LayerKind.Parcels:
        wanted = {b.cadastral_key.parcel_key() for b in project.cadastral_buildings()}
    else:  # the project area carries no building correspondence
        wanted = layer_keys
    report = CartographyReport(
        kind=kind.value,
        missing_in_layer=tuple(sorted(wanted - layer_keys)),
        missing_in_buildings=tuple(sorted(layer_keys - wanted)),
    )
    return project.with_layer(layer), report


# --- field data ----------------------------------------------------------------

_CORRECTION_FIELDS = ("wall_type", "roof_type", "use_type", "state_type", "construction_year")


@dataclass(frozen=True)
class FieldRecord:
    """One field-crew result: GPS point, photo id, optional survey, corrections."""

    building_id: Optional[int] = None      # None requires new_independent
    new_independent: bool = False
    x: Optional[float] = None
    y: Optional[float] = None
    photo_id: Optional[str] = None
    classes: Optional[tuple[str, ...]] = None
    raw: Mapping[str, float] = field(default_factory=dict)
    observer_id: str = ""
    date: str = ""
    corrections: Mapping[str, Any] = field(default_factory=dict)


def ingest_field_data(project: Project, record: FieldRecord) -> tuple[Project, Building]:
    """Apply one field record: coordinates/photo, survey with immediate index
    computation, and cadastral corrections with subtypology re-derivation."""
    if project.state not in (ProjectState.FieldWork, ProjectState.UploadingResults):
        raise WrongState(
            f"field data accepted during FieldWork/UploadingResults, not {project.state.name}")

    if record.building_id is None:
        if not record.new_independent:
            raise UnknownBuilding("record addresses no building id and is not independent")
        new_id = max(project.buildings, default=0) + 1
        types = {k: record.corrections.get(k) for k in _CORRECTION_FIELDS}
        b = Building(
            id=new_id,
            kind=BuildingKind.Independent,
            wall_type=str(types["wall_type"] or ""),
            roof_type=str(types["roof_type"] or ""),
            use_type=str(types["use_type"] or ""),
            state_type=str(types["state_type"] or ""),
            construction_year=types["construction_year"],
        )
    else:
        if record.building_id not in project.buildings:
            raise UnknownBuilding(f"no building with id {record.building_id}")
        b = project.building(record.building_id)

    stale_reason = None

    if record.x is not None and record.y is not None:
        b = dataclasses.replace(b, coord=(float(record.x), float(record.y)))
    if record.photo_id:
        b = dataclasses.replace(b, photo_id=record.photo_id)

    if b.kind is BuildingKind.Cadastral and record.corrections:
        fixes = {
            k: v for k, v in record.corrections.items()
            if k in _CORRECTION_FIELDS and v is not None and getattr(b, k) != v
        }
        if fixes:
            old_key = b.subtypology
            b = dataclasses.replace(b, edited=True, **fixes)
            if old_key is not None:
                new_key = _subtypology_key(b, project.cutoff_year)
                if new_key != old_key:
                    b = dataclasses.replace(b, subtypology=new_key)
                    stale_reason = (
                        f"building {b.id} corrected in the field, subtypology changed")

    if record.classes is not None:
        classes = tuple(record.classes)
        if len(classes) != 11 or any(not c for c in classes):
            raise IncompleteSurvey(
                f"survey for building {b.id} carries {sum(1 for c in classes if c)} of 11 classes")
        survey = SurveyRecord(
            classes=classes,
            raw={k: float(v) for k, v in record.raw.items() if v is not None},
            observer_id=record.observer_id,
            date=record.date,
        )
        vi = risk.compute_vi(classes, project.scale)
        b = dataclasses.replace(
            b,
            survey=survey,
            surveyed=True,
            vi=vi,
            vi_norm=risk.normalize_vi(vi, project.scale),
            vi_source=ViSource.Direct,
        )

    project = project.with_buildings([b])
    if stale_reason:
        project = mark_stale(project, stale_reason)
    return project, b


# --- field-data CSV batches ------------------------------------------------------

_FIELD_CSV_COLUMNS = ("id", "x", "y", "photo") + tuple(f"p{i}" for i in range(1, 12))


def parse_field_csv(stream: str | bytes) -> tuple[list[FieldRecord], list[RowError]]:
    """Parse a field-data CSV batch (one row per building) into records.

    Columns: id (or NEW), x, y, photo, p1..p11, observer, date, the raw survey
    measurements by their form names, and optional cadastral corrections
    (pared, techo, uso, estado, anio).
    """
    text = _decode(stream)
    lines = _iter_csv_lines(text)
    try:
        _, header = next(lines)
    except StopIteration:
        header = []
    if "id" not in header:
        raise MissingColumn("field-data CSV lacks columns: ['id']")
    index = {name: i for i, name in enumerate(header)}

    rows: list[FieldRecord] = []
    errors: list[RowError] = []
    for line, cells in lines:
        def cell(name: str) -> str:
            i = index.get(name)
            if i is None or i >= len(cells):
                return ""
            return cells[i].strip()

        try:
            ident = cell("id")
            new_independent = ident.upper() == "NEW"
            building_id = None if new_independent or not ident else int(ident)
            if building_id is None and not new_independent:
                errors.append(RowError(line, "empty id (use NEW for independent buildings)"))
                continue

            classes = tuple(cell(f"p{i}").upper() for i in range(1, 12))
            has_any_class = any(classes)
            measurements = {
                name: float(cell(name)) for name in RAW_FIELDS if cell(name)
            }
            corrections: dict[str, Any] = {}
            for col, attr in (("pared", "wall_type"), ("techo", "roof_type"),
                              ("uso", "use_type"), ("estado", "state_type")):
                if cell(col):
                    corrections[attr] = cell(col)
            if cell("anio"):
                corrections["construction_year"] = int(cell("anio"))

            rows.append(FieldRecord(
                building_id=building_id,
                new_independent=new_independent,
                x=float(cell("x")) if cell("x") else None,
                y=float(cell("y")) if cell("y") else None,
                photo_id=cell("photo") or None,
                classes=classes if has_any_class else None,
                raw=measurements,
                observer_id=cell("observer"),
                date=cell("date"),
                corrections=corrections,
            ))
        except (ValueError, TypeError) as exc:
            errors.append(RowError(line, str(exc)))
    return rows, errors
