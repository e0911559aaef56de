"""Core domain values and the project workflow state machine.

Every type here is an immutable value: "mutation" returns a new value via
``dataclasses.replace`` or the ``with_*`` helpers. Dict/tuple fields are never
mutated in place, so snapshots can be shared freely across threads; the store
layer serializes writers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional

from .errors import IllegalTransition

PARAM_COUNT = 11
CLASSES = ("A", "B", "C", "D")

#: survey form raw-measurement field names (floors, areas, shear strength, ...)
RAW_FIELDS = (
    "N", "At", "Ax", "Ay", "tk", "h", "Pm", "Ps",
    "b1", "b2", "porch_pct", "T_over_H", "deltaM_over_M_pct", "L_over_S",
)


class ProjectState(enum.Enum):
    Created = 0
    TypesReconciled = 1
    TypologiesDefined = 2
    Sampled = 3
    FieldWork = 4
    UploadingResults = 5
    Closed = 6

    def __ge__(self, other: "ProjectState") -> bool:
        return self.value >= other.value

    def __gt__(self, other: "ProjectState") -> bool:
        return self.value > other.value

    def __le__(self, other: "ProjectState") -> bool:
        return self.value <= other.value

    def __lt__(self, other: "ProjectState") -> bool:
        return self.value < other.value


#: the only legal transitions: the forward chain plus UploadingResults -> Closed
LEGAL_TRANSITIONS = frozenset(
    {(s, ProjectState(s.value + 1)) for s in ProjectState if s is not ProjectState.Closed}
    | {(ProjectState.UploadingResults, ProjectState.Closed)}
)


class BuildingKind(enum.Enum):
    Cadastral = "Cadastral"
    Independent = "Independent"


class ViSource(enum.Enum):
    Direct = "Direct"
    Propagated = "Propagated"
    NONE = "None"


@dataclass(frozen=True)
class ScaleRow:
    """One vulnerability parameter: class values K(A..D) and weight W."""

    name: str
    k: Mapping[str, float]  # class letter -> K value
    w: float


@dataclass(frozen=True)
class VulnerabilityScale:
    rows: tuple[ScaleRow, ...]

    def max_vi(self) -> float:
        return sum(row.k["D"] * row.w for row in self.rows)


def _row(name: str, a: float, b: float, c: float, d: float, w: float) -> ScaleRow:
    return ScaleRow(name=name, k={"A": a, "B": b, "C": c, "D": d}, w=w)


#: the Benedetti-Petrini 11-parameter scale (max index 382.5)
DEFAULT_SCALE = VulnerabilityScale(rows=(
    _row("Organización del sistema resistente", 0, 5, 20, 45, 1.00),
    _row("Calidad del sistema resistente", 0, 5, 25, 45, 0.25),
    _row("Resistencia convencional", 0, 5, 25, 45, 1.50),
    _row("Posición del edificio y cimentación", 0, 5, 25, 45, 0.75),
    _row("Diafragmas horizontales", 0, 5, 15, 45, 1.00),
    _row("Configuración en planta", 0, 5, 25, 45, 0.50),
    _row("Configuración en elevación", 0, 5, 25, 45, 1.00),
    _row("Distancia máxima entre los muros", 0, 5, 25, 45, 0.25),
    _row("Tipo de cubierta", 0, 15, 25, 45, 1.00),
    _row("Elementos no estructurales", 0, 0, 25, 45, 0.25),
    _row("Estado de conservación", 0, 5, 25, 45, 1.00),
))


@dataclass(frozen=True)
class SubTypologyKey:
    """Observed combination of the four construction types and the year band."""

    wall_type: str
    roof_type: str
    use_type: str
    state_type: str
    pre_cutoff: bool  # built strictly before the project cutoff year

    def label(self) -> str:
        era = "pre" if self.pre_cutoff else "post"
        return f"{self.wall_type}|{self.roof_type}|{self.use_type}|{self.state_type}|{era}"

    @staticmethod
    def from_label(text: str) -> "SubTypologyKey":
        wall, roof, use, state, era = text.split("|")
        return SubTypologyKey(wall, roof, use, state, era == "pre")


@dataclass(frozen=True)
class SurveyRecord:
    """Field form result: one class per parameter plus optional raw measurements."""

    classes: tuple[str, ...]  # exactly 11 entries of A/B/C/D, parameter order
    raw: Mapping[str, float] = field(default_factory=dict)
    observer_id: str = ""
    date: str = ""

    def __post_init__(self):
        if len(self.classes) != PARAM_COUNT:
            raise ValueError(f"survey needs {PARAM_COUNT} classes, got {len(self.classes)}")
        bad = [c for c in self.classes if c not in CLASSES]
        if bad:
            raise ValueError(f"invalid parameter classes: {bad}")
        negative = {k: v for k, v in self.raw.items() if v is not None and v < 0}
        if negative:
            raise ValueError(f"raw survey measurements must be >= 0: {negative}")


@dataclass(frozen=True)
class CadastralKey:
    departamento: str
    centro: str
    distrito: str
    manzana: str
    lote: str
    edificacion: str

    def parts(self) -> tuple[str, ...]:
        return (self.departamento, self.centro, self.distrito,
                self.manzana, self.lote, self.edificacion)

    def block_key(self) -> str:
        """Block identity: the key prefix down to the manzana level."""
        parts = (self.departamento, self.centro, self.distrito, self.manzana)
        return "-".join(p for p in parts if p)

    def parcel_key(self) -> str:
        parts = (self.departamento, self.centro, self.distrito, self.manzana, self.lote)
        return "-".join(p for p in parts if p)

    def full_key(self) -> str:
        return "-".join(p for p in self.parts() if p)


@dataclass(frozen=True)
class Building:
    id: int
    kind: BuildingKind
    cadastral_key: Optional[CadastralKey] = None
    wall_type: str = ""
    roof_type: str = ""
    use_type: str = ""
    state_type: str = ""
    construction_year: Optional[int] = None
    subtypology: Optional[SubTypologyKey] = None
    typology_id: Optional[str] = None
    selected_for_survey: bool = False
    surveyed: bool = False
    edited: bool = False
    coord: Optional[tuple[float, float]] = None
    photo_id: Optional[str] = None
    survey: Optional[SurveyRecord] = None
    vi: Optional[float] = None
    vi_norm: Optional[float] = None
    vi_source: ViSource = ViSource.NONE
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is BuildingKind.Independent:
            if self.subtypology is not None or self.typology_id is not None:
                raise ValueError("independent buildings carry no subtypology/typology")
            if self.vi_source is ViSource.Propagated:
                raise ValueError("independent buildings never receive propagated values")
            if self.cadastral_key is not None:
                raise ValueError("independent buildings have no cadastral key")
        else:
            if self.cadastral_key is None:
                raise ValueError("cadastral buildings need a cadastral key")
        if self.surveyed and self.survey is None:
            raise ValueError("surveyed buildings must carry a survey record")
        if (self.vi is None) != (self.vi_norm is None):
            raise ValueError("vi and vi_norm are set together")


@dataclass(frozen=True)
class Typology:
    id: str
    name: str
    description: str = ""
    subtypology_keys: frozenset[SubTypologyKey] = frozenset()
    sample_quota: Optional[float] = None
    extra: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class DamageEntry:
    d: float
    level: str

    def __post_init__(self):
        if not (0.0 <= self.d <= 1.0):
            raise ValueError(f"damage index out of [0,1]: {self.d}")


@dataclass(frozen=True)
class ScenarioMeta:
    lat: Optional[float] = None
    lon: Optional[float] = None
    depth_km: Optional[float] = None
    magnitude: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str
    ag: float  # horizontal ground acceleration / g
    meta: Optional[ScenarioMeta] = None
    damages: Mapping[int, DamageEntry] = field(default_factory=dict)
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.ag <= 0:
            raise ValueError("scenario acceleration must be > 0")


def canonical_ag(ag: float) -> str:
    """Canonical decimal form used for the exact duplicate-acceleration check."""
    return repr(float(ag))


class LayerKind(enum.Enum):
    Parcels = "Parcels"
    Blocks = "Blocks"
    ProjectArea = "ProjectArea"


@dataclass(frozen=True)
class LayerFeature:
    key: str
    # each ring: closed sequence of (x, y) positions, first == last, len >= 4
    rings: tuple[tuple[tuple[float, float], ...], ...]
    # original GeoJSON geometry, copied verbatim into exports when present
    source_geometry: Optional[Mapping[str, Any]] = None


@dataclass(frozen=True)
class MapLayer:
    kind: LayerKind
    features: tuple[LayerFeature, ...]

    def __post_init__(self):
        for feat in self.features:
            for ring in feat.rings:
                if len(ring) < 4:
                    raise ValueError(f"ring with {len(ring)} positions in feature {feat.key}")
                if ring[0] != ring[-1]:
                    raise ValueError(f"unclosed ring in feature {feat.key}")
        if self.kind is LayerKind.ProjectArea and len(self.features) != 1:
            raise ValueError("project area layer must hold exactly one feature")

    def keys(self) -> set[str]:
        return {f.key for f in self.features}


@dataclass(frozen=True)
class TypeEntry:
    code: str
    label: str
    aliases: frozenset[str] = frozenset()


TYPE_CATEGORIES = ("Wall", "Roof", "Use", "State")


@dataclass(frozen=True)
class TypeMasters:
    """Per-category code masters: canonical codes, labels and alias spellings."""

    categories: Mapping[str, tuple[TypeEntry, ...]] = field(
        default_factory=lambda: {c: () for c in TYPE_CATEGORIES})

    def entries(self, category: str) -> tuple[TypeEntry, ...]:
        return tuple(self.categories.get(category, ()))

    def resolve(self, category: str, raw: str) -> Optional[str]:
        """Canonical code for a raw value, matching codes then aliases, else None."""
        value = raw.strip()
        folded = value.casefold()
        for entry in self.entries(category):
            if folded == entry.code.casefold():
                return entry.code
        for entry in self.entries(category):
            if any(folded == a.casefold() for a in entry.aliases):
                return entry.code
        return None


@dataclass(frozen=True)
class TypologyMasterEntry:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class SystemMasters:
    """Shared, system-level masters reused across projects."""

    types: TypeMasters = field(default_factory=TypeMasters)
    typologies: tuple[TypologyMasterEntry, ...] = ()


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    description: str = ""
    author: str = ""
    date: str = ""
    state: ProjectState = ProjectState.Created
    scale: VulnerabilityScale = DEFAULT_SCALE
    cutoff_year: int = 1972
    vuln_thresholds: tuple[float, float] = (33.3, 66.6)
    damage_thresholds: tuple[float, float, float, float] = (0.15, 0.35, 0.6, 0.9)
    stale: bool = False
    stale_reason: str = ""
    rng_id: str = "python-random-mt19937"
    masters: TypeMasters = field(default_factory=TypeMasters)
    buildings: Mapping[int, Building] = field(default_factory=dict)
    typologies: tuple[Typology, ...] = ()
    scenarios: tuple[Scenario, ...] = ()
    layers: Mapping[str, MapLayer] = field(default_factory=dict)
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.vuln_thresholds
        if not (0.0 < lo < hi < 100.0):
            raise ValueError(f"vulnerability thresholds must ascend within (0,100): {self.vuln_thresholds}")
        dt = self.damage_thresholds
        if not all(0.0 < a < b for a, b in zip(dt, dt[1:])) or not (0.0 < dt[0] and dt[-1] < 1.0):
            raise ValueError(f"damage thresholds must ascend within (0,1): {dt}")

    # --- lookup helpers ---------------------------------------------------

    def building(self, building_id: int) -> Building:
        return self.buildings[building_id]

    def typology(self, typology_id: str) -> Optional[Typology]:
        for t in self.typologies:
            if t.id == typology_id:
                return t
        return None

    def scenario(self, scenario_id: str) -> Optional[Scenario]:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        return None

    def layer(self, kind: LayerKind) -> Optional[MapLayer]:
        return self.layers.get(kind.value)

    def cadastral_buildings(self) -> list[Building]:
        return [b for b in self.buildings.values() if b.kind is BuildingKind.Cadastral]

    def has_any_vi(self) -> bool:
        return any(b.vi is not None for b in self.buildings.values())

    def discovered_keys(self) -> set[SubTypologyKey]:
        return {b.subtypology for b in self.buildings.values() if b.subtypology is not None}

    def assigned_keys(self) -> set[SubTypologyKey]:
        out: set[SubTypologyKey] = set()
        for t in self.typologies:
            out |= t.subtypology_keys
        return out

    def unassigned_keys(self) -> set[SubTypologyKey]:
        return self.discovered_keys() - self.assigned_keys()

    # --- functional update helpers -----------------------------------------

    def with_buildings(self, updated: Iterable[Building]) -> "Project":
        """New project with the given buildings merged in (id-sorted order kept)."""
        merged = dict(self.buildings)
        for b in updated:
            merged[b.id] = b
        ordered = {bid: merged[bid] for bid in sorted(merged)}
        return replace(self, buildings=ordered)

    def with_typology(self, typology: Typology) -> "Project":
        found = False
        out = []
        for t in self.typologies:
            if t.id == typology.id:
                out.append(typology)
                found = True
            else:
                out.append(t)
        if not found:
            out.append(typology)
        return replace(self, typologies=tuple(out))

    def with_scenario(self, scenario: Scenario) -> "Project":
        found = False
        out = []
        for s in self.scenarios:
            if s.id == scenario.id:
                out.append(scenario)
                found = True
            else:
                out.append(s)
        if not found:
            out.append(scenario)
        return replace(self, scenarios=tuple(out))

    def with_layer(self, layer: MapLayer) -> "Project":
        layers = dict(self.layers)
        layers[layer.kind.value] = layer
        return replace(self, layers=layers)


# --- workflow operations ---------------------------------------------------

def advance_state(project: Project, target: ProjectState) -> Project:
    """Move the workflow one step forward (or UploadingResults -> Closed)."""
    if (project.state, target) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(project.state.name, target.name)
    return replace(project, state=target)


def mark_stale(project: Project, reason: str) -> Project:
    """Flag computed results as outdated; consumers must recompute before export."""
    return replace(project, stale=True, stale_reason=reason)


def clear_stale(project: Project) -> Project:
    return replace(project, stale=False, stale_reason="")
