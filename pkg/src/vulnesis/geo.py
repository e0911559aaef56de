"""Spatial block assignment, aggregation at three granularities, building
filtering and GeoJSON thematic-map export.

Coordinates are planar project coordinates throughout; GeoJSON is used as
interchange syntax with positions emitted verbatim.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from . import risk
from .domain import (
    Building,
    LayerKind,
    Project,
)
from .errors import (
    DegenerateRing,
    MissingLayer,
    NoBlocksLayer,
    StaleProject,
    UnknownLevel,
    UnknownScenario,
    UnknownTypology,
)

SCHEMA_VERSION = 1

Point = tuple[float, float]
Ring = Sequence[Point]


class Granularity(enum.Enum):
    Building = "Building"
    Block = "Block"
    Project = "Project"


class Metric(enum.Enum):
    Vulnerability = "Vulnerability"
    Damage = "Damage"


def point_in_polygon(p: Point, rings: Sequence[Ring]) -> bool:
    """Even-odd membership over all rings (holes supported); boundary counts inside."""
    px, py = p
    eps = 1e-12
    for ring in rings:
        if len(ring) < 4:
            raise DegenerateRing(f"ring with {len(ring)} positions")
        if ring[0] != ring[-1]:
            raise DegenerateRing("ring is not closed")

    for ring in rings:
        for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
            cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
            if (abs(cross) <= eps
                    and min(x1, x2) - eps <= px <= max(x1, x2) + eps
                    and min(y1, y2) - eps <= py <= max(y1, y2) + eps):
                return True

    inside = False
    for ring in rings:
        for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
            if (y1 > py) != (y2 > py):
                x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if px < x_at:
                    inside = not inside
    return inside


@dataclass(frozen=True)
class BlockAssignment:
    by_building: Mapping[int, str]
    unassigned: tuple[int, ...]


def _bbox(rings) -> tuple[float, float, float, float]:
    xs = [x for ring in rings for x, _ in ring]
    ys = [y for ring in rings for _, y in ring]
    return min(xs), min(ys), max(xs), max(ys)


def assign_blocks(project: Project) -> BlockAssignment:
    """Resolve each building to a block: polygon containment first, cadastral
    block code as fallback, otherwise unassigned."""
    layer = project.layer(LayerKind.Blocks)
    if layer is None:
        raise NoBlocksLayer("load a Blocks layer before assigning blocks")
    boxes = [_bbox(feat.rings) for feat in layer.features]
    assigned: dict[int, str] = {}
    unassigned: list[int] = []
    for bid in sorted(project.buildings):
        b = project.buildings[bid]
        key = None
        if b.coord is not None:
            x, y = b.coord
            for feat, (x0, y0, x1, y1) in zip(layer.features, boxes):
                if x0 <= x <= x1 and y0 <= y <= y1 and point_in_polygon(b.coord, feat.rings):
                    key = feat.key
                    break
        if key is None and b.cadastral_key is not None:
            code = b.cadastral_key.block_key()
            key = code or None
        if key is None:
            unassigned.append(bid)
        else:
            assigned[bid] = key
    return BlockAssignment(by_building=assigned, unassigned=tuple(unassigned))


def _fallback_blocks(project: Project) -> BlockAssignment:
    # without a Blocks layer, group purely on cadastral block codes
    assigned: dict[int, str] = {}
    unassigned: list[int] = []
    for bid in sorted(project.buildings):
        b = project.buildings[bid]
        code = b.cadastral_key.block_key() if b.cadastral_key else ""
        if code:
            assigned[bid] = code
        else:
            unassigned.append(bid)
    return BlockAssignment(by_building=assigned, unassigned=tuple(unassigned))


@dataclass(frozen=True)
class AggFeature:
    key: str
    value: Optional[float]
    level: str
    n: int


@dataclass(frozen=True)
class AggregateResult:
    granularity: Granularity
    metric: Metric
    scenario_id: Optional[str]
    features: tuple[AggFeature, ...]


def _metric_values(project: Project, metric: Metric, scenario_id: Optional[str]) -> dict[int, float]:
    if metric is Metric.Damage:
        scenario = project.scenario(scenario_id or "")
        if scenario is None:
            raise UnknownScenario(scenario_id)
        return {bid: entry.d for bid, entry in scenario.damages.items()}
    return {
        bid: b.vi_norm for bid, b in project.buildings.items() if b.vi_norm is not None
    }


def _level_for(project: Project, metric: Metric, value: Optional[float]) -> str:
    if value is None:
        return risk.NO_DATA
    if metric is Metric.Damage:
        return risk.damage_level(project, value).name
    return risk.vulnerability_level(project, value).name


def aggregate(
    project: Project,
    metric: Metric,
    granularity: Granularity,
    scenario_id: Optional[str] = None,
) -> AggregateResult:
    """Per-building values, per-block means, or one project-wide mean.

    Buildings lacking the metric are excluded from means; units with zero
    valued members come out as no-data features.
    """
    if project.stale:
        raise StaleProject(f"results outdated ({project.stale_reason}); recompute first")
    values = _metric_values(project, metric, scenario_id)

    features: list[AggFeature] = []
    if granularity is Granularity.Building:
        for bid in sorted(project.buildings):
            value = values.get(bid)
            features.append(AggFeature(
                key=str(bid), value=value,
                level=_level_for(project, metric, value),
                n=1 if value is not None else 0,
            ))
    elif granularity is Granularity.Block:
        blocks_layer = project.layer(LayerKind.Blocks)
        assignment = assign_blocks(project) if blocks_layer else _fallback_blocks(project)
        groups: dict[str, list[float]] = {}
        if blocks_layer:
            for feat in blocks_layer.features:
                groups.setdefault(feat.key, [])
        for bid, key in assignment.by_building.items():
            groups.setdefault(key, [])
            if bid in values:
                groups[key].append(values[bid])
        for key in sorted(groups):
            vals = groups[key]
            value = sum(vals) / len(vals) if vals else None
            features.append(AggFeature(
                key=key, value=value,
                level=_level_for(project, metric, value), n=len(vals),
            ))
    else:
        vals = [values[bid] for bid in sorted(values)]
        value = sum(vals) / len(vals) if vals else None
        features.append(AggFeature(
            key=project.id, value=value,
            level=_level_for(project, metric, value), n=len(vals),
        ))
    return AggregateResult(
        granularity=granularity, metric=metric,
        scenario_id=scenario_id if metric is Metric.Damage else None,
        features=tuple(features),
    )


# --- GeoJSON export ----------------------------------------------------------

def _polygon_geometry(feat) -> Mapping[str, Any]:
    if feat.source_geometry:
        return feat.source_geometry
    return {"type": "Polygon", "coordinates": [[list(pt) for pt in ring] for ring in feat.rings]}


def export_map(
    project: Project,
    metric: Metric,
    granularity: Granularity,
    scenario_id: Optional[str] = None,
    destination: Optional[str | Path] = None,
) -> dict[str, Any]:
    """Thematic map as a GeoJSON FeatureCollection; features sorted by key.

    Building maps emit points (or matching parcel polygons when a Parcels
    layer is loaded); block maps copy the Blocks layer polygons; the project
    map copies the project-area polygon. Features whose unit has no geometry
    keep a null geometry so every aggregate feature is exported.
    """
    result = aggregate(project, metric, granularity, scenario_id)

    geometries: dict[str, Any] = {}
    if granularity is Granularity.Building:
        parcels = project.layer(LayerKind.Parcels)
        parcel_geoms = {f.key: _polygon_geometry(f) for f in parcels.features} if parcels else {}
        for bid in sorted(project.buildings):
            b = project.buildings[bid]
            geom = None
            if b.cadastral_key is not None and parcel_geoms:
                geom = parcel_geoms.get(b.cadastral_key.parcel_key())
            if geom is None and b.coord is not None:
                geom = {"type": "Point", "coordinates": [b.coord[0], b.coord[1]]}
            geometries[str(bid)] = geom
    elif granularity is Granularity.Block:
        layer = project.layer(LayerKind.Blocks)
        if layer is None:
            raise MissingLayer(granularity.value)
        geometries = {f.key: _polygon_geometry(f) for f in layer.features}
    else:
        layer = project.layer(LayerKind.ProjectArea)
        if layer is None:
            raise MissingLayer(granularity.value)
        geometries = {result.features[0].key: _polygon_geometry(layer.features[0])}

    features = []
    for agg in result.features:
        props: dict[str, Any] = {
            "key": agg.key,
            "metric": metric.value,
            "value": agg.value,
            "level": agg.level,
            "n": agg.n,
            "schema_version": SCHEMA_VERSION,
        }
        if result.scenario_id is not None:
            props["scenario_id"] = result.scenario_id
        if granularity is Granularity.Building:
            b = project.buildings.get(int(agg.key))
            if b is not None:
                props["vi_source"] = b.vi_source.value
        features.append({
            "type": "Feature",
            "geometry": geometries.get(agg.key),
            "properties": props,
        })

    collection = {
        "type": "FeatureCollection",
        "coordinate_system": "planar, project-local CRS",
        "schema_version": SCHEMA_VERSION,
        "features": features,
    }
    if destination is not None:
        Path(destination).write_bytes(geojson_bytes(collection))
    return collection


def geojson_bytes(collection: Mapping[str, Any]) -> bytes:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return (json.dumps(collection, sort_keys=True, indent=2) + "\n").encode("utf-8")


# --- building filter ------------------------------------------------------------

SURVEY_KIND_SELECTED = "Encuestadas"
SURVEY_KIND_UNSELECTED = "NO_Encuestadas"


@dataclass(frozen=True)
class BuildingFilter:
    ids: Optional[frozenset[int]] = None
    survey_kind: Optional[str] = None  # Encuestadas / NO_Encuestadas
    edited: Optional[bool] = None
    typology_id: Optional[str] = None
    vuln_level: Optional[str] = None


@dataclass(frozen=True)
class FilterResult:
    total: int
    buildings: tuple[Building, ...]

    @property
    def count(self) -> int:
        return len(self.buildings)


def filter_buildings(project: Project, criteria: BuildingFilter) -> FilterResult:
    """Conjunction of the present criteria; an empty filter returns everything."""
    if criteria.typology_id is not None and project.typology(criteria.typology_id) is None:
        raise UnknownTypology(criteria.typology_id)
    if criteria.vuln_level is not None:
        if criteria.vuln_level not in {lv.name for lv in risk.VULNERABILITY_LEVELS}:
            raise UnknownLevel(criteria.vuln_level)
    if criteria.survey_kind is not None:
        if criteria.survey_kind not in (SURVEY_KIND_SELECTED, SURVEY_KIND_UNSELECTED):
            raise UnknownLevel(f"unknown survey kind {criteria.survey_kind!r}")

    def keep(b: Building) -> bool:
        if criteria.ids is not None and b.id not in criteria.ids:
            return False
        if criteria.survey_kind == SURVEY_KIND_SELECTED and not b.selected_for_survey:
            return False
        if criteria.survey_kind == SURVEY_KIND_UNSELECTED and b.selected_for_survey:
            return False
        if criteria.edited is not None and b.edited != criteria.edited:
            return False
        if criteria.typology_id is not None and b.typology_id != criteria.typology_id:
            return False
        if criteria.vuln_level is not None:
            if b.vi_norm is None:
                return False
            if risk.vulnerability_level(project, b.vi_norm).name != criteria.vuln_level:
                return False
        return True

    matched = tuple(
        project.buildings[bid] for bid in sorted(project.buildings)
        if keep(project.buildings[bid])
    )
    return FilterResult(total=len(project.buildings), buildings=matched)
