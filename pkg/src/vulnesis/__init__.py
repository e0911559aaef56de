"""Seismic vulnerability workbench.

Cadastral ingestion, typology grouping, seeded survey sampling, the
Benedetti-Petrini vulnerability index with tri-linear damage scenarios,
and thematic GeoJSON map export, behind a library, an HTTP service and a CLI.
"""

from .domain import (
    DEFAULT_SCALE,
    Building,
    BuildingKind,
    CadastralKey,
    MapLayer,
    LayerKind,
    Project,
    ProjectState,
    Scenario,
    SubTypologyKey,
    SurveyRecord,
    SystemMasters,
    Typology,
    ViSource,
    VulnerabilityScale,
    advance_state,
    mark_stale,
)
from .errors import VulnesisError
from .geo import (
    AggregateResult,
    BuildingFilter,
    Granularity,
    Metric,
    aggregate,
    assign_blocks,
    export_map,
    filter_buildings,
    point_in_polygon,
)
from .ingest import (
    FieldRecord,
    attach_cadastre,
    discover_subtypologies,
    discover_types,
    ingest_field_data,
    load_cartography,
    parse_cadastre,
    parse_field_csv,
    reconcile_types,
)
from .pipeline import advance_project, create_project, recompute, set_scale
from .risk import (
    DAMAGE_CURVES,
    DAMAGE_LEVELS,
    VULNERABILITY_LEVELS,
    classify,
    compute_vi,
    damage_bounds,
    damage_curve,
    damage_index,
    define_scenario,
    normalize_vi,
    run_scenario,
    validate_scale,
)
from .store import list_projects, load_project, save_project
from .typology import (
    SampleMode,
    SampleSpec,
    assign_subtypologies,
    create_typology,
    delete_typology,
    import_master_typology,
    propagate_vi,
    sample,
    typology_stats,
    unassign_subtypologies,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
