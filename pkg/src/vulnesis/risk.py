"""Vulnerability-index and damage-scenario engine.

Pure functions over immutable domain values: weighted-sum index, 0-100
normalization, the tri-linear damage functions anchored every 10 normalized
index points, band classification, and scenario evaluation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .domain import (
    CLASSES,
    PARAM_COUNT,
    DamageEntry,
    Project,
    Scenario,
    ScenarioMeta,
    ViSource,
    VulnerabilityScale,
    canonical_ag,
)
from .errors import (
    BadBandConfig,
    DuplicateAcceleration,
    InvalidScale,
    OutOfRange,
    StaleProject,
    UnknownScenario,
    WrongArity,
)

K_MAX = 45.0
W_MIN, W_MAX = 0.25, 1.5


@dataclass(frozen=True)
class Level:
    name: str
    ordinal: int


VULNERABILITY_LEVELS = (Level("baja", 0), Level("media", 1), Level("alta", 2))
DAMAGE_LEVELS = (
    Level("menor", 0), Level("moderado", 1), Level("severo", 2),
    Level("total", 3), Level("colapso", 4),
)

NO_DATA = "no-data"


@dataclass(frozen=True)
class DamageCurve:
    """One line of the damage family: d_raw = slope * (a/g) - intercept."""

    vi_norm_anchor: float
    slope: float
    intercept: float


#: damage lines anchored at normalized index 0, 10, ..., 100
DAMAGE_CURVES = (
    DamageCurve(0, 2.0786, 0.1188),
    DamageCurve(10, 2.4086, 0.1226),
    DamageCurve(20, 2.7861, 0.1194),
    DamageCurve(30, 3.2845, 0.1261),
    DamageCurve(40, 3.8356, 0.1301),
    DamageCurve(50, 4.5161, 0.1452),
    DamageCurve(60, 5.1376, 0.1376),
    DamageCurve(70, 5.8947, 0.1368),
    DamageCurve(80, 6.7470, 0.1325),
    DamageCurve(90, 7.6712, 0.1371),
    DamageCurve(100, 8.6154, 0.1231),
)

_ANCHOR_STEP = 10.0


def validate_scale(scale: VulnerabilityScale) -> list[str]:
    """Report every violated scale constraint; an empty report means valid."""
    report: list[str] = []
    if len(scale.rows) != PARAM_COUNT:
        report.append(f"scale must have {PARAM_COUNT} rows, found {len(scale.rows)}")
    for idx, row in enumerate(scale.rows, start=1):
        missing = [c for c in CLASSES if c not in row.k]
        if missing:
            report.append(f"row {idx}: missing K values for classes {missing}")
            continue
        ks = [row.k[c] for c in CLASSES]
        if any(k < 0 or k > K_MAX for k in ks):
            report.append(f"row {idx}: K out of range [0,{K_MAX:g}]: {ks}")
        if any(a > b for a, b in zip(ks, ks[1:])):
            report.append(f"row {idx}: K not non-decreasing A..D: {ks}")
        if not (W_MIN <= row.w <= W_MAX):
            report.append(f"row {idx}: W out of range [{W_MIN},{W_MAX}]: {row.w}")
    return report


def compute_vi(classes: Sequence[str], scale: VulnerabilityScale) -> float:
    """Weighted sum of the per-parameter class values: sum of K_i * W_i."""
    if len(classes) != PARAM_COUNT:
        raise WrongArity(f"need {PARAM_COUNT} parameter classes, got {len(classes)}")
    problems = validate_scale(scale)
    if problems:
        raise InvalidScale("; ".join(problems))
    bad = [c for c in classes if c not in CLASSES]
    if bad:
        raise WrongArity(f"invalid parameter classes: {bad}")
    return sum(row.k[c] * row.w for row, c in zip(scale.rows, classes))


def normalize_vi(vi: float, scale: VulnerabilityScale) -> float:
    """Rescale an index to 0-100 (divide by max/100; 3.825 for the default scale)."""
    top = scale.max_vi()
    if not (0.0 <= vi <= top):
        raise OutOfRange(f"vi {vi} outside [0, {top}]")
    return 100.0 * vi / top


def denormalize_vi(vi_norm: float, scale: VulnerabilityScale) -> float:
    if not (0.0 <= vi_norm <= 100.0):
        raise OutOfRange(f"vi_norm {vi_norm} outside [0, 100]")
    return vi_norm * scale.max_vi() / 100.0


def damage_curve(vi_norm: float) -> tuple[float, float]:
    """(slope, intercept) of the damage line for a normalized index.

    Exact table coefficients at the anchors; both coefficients linearly
    interpolated between the bracketing anchors elsewhere.
    """
    if not (0.0 <= vi_norm <= 100.0):
        raise OutOfRange(f"vi_norm {vi_norm} outside [0, 100]")
    pos = vi_norm / _ANCHOR_STEP
    lo = int(pos)
    if lo >= len(DAMAGE_CURVES) - 1:
        last = DAMAGE_CURVES[-1]
        return last.slope, last.intercept
    frac = pos - lo
    if frac == 0.0:
        cur = DAMAGE_CURVES[lo]
        return cur.slope, cur.intercept
    a, b = DAMAGE_CURVES[lo], DAMAGE_CURVES[lo + 1]
    slope = a.slope + frac * (b.slope - a.slope)
    intercept = a.intercept + frac * (b.intercept - a.intercept)
    return slope, intercept


def damage_index(vi_norm: float, ag: float) -> float:
    """Damaged proportion in [0,1] for ground acceleration ag (fraction of g)."""
    if ag < 0:
        raise OutOfRange(f"acceleration ratio must be >= 0, got {ag}")
    slope, intercept = damage_curve(vi_norm)
    raw = slope * ag - intercept
    return min(1.0, max(0.0, raw))


def damage_bounds(vi_norm: float) -> tuple[float, float]:
    """Accelerations where damage starts (d>0) and where it reaches collapse (d=1)."""
    slope, intercept = damage_curve(vi_norm)
    return intercept / slope, (1.0 + intercept) / slope


def classify(value: float, thresholds: Sequence[float], levels: Sequence[Level]) -> Level:
    """Band lookup: a value equal to a threshold belongs to the upper band."""
    if len(levels) != len(thresholds) + 1:
        raise BadBandConfig(
            f"{len(levels)} levels require {len(levels) - 1} thresholds, got {len(thresholds)}")
    if any(a >= b for a, b in zip(thresholds, thresholds[1:])):
        raise BadBandConfig(f"thresholds must be strictly ascending: {list(thresholds)}")
    j = sum(1 for t in thresholds if t <= value)
    return levels[j]


def vulnerability_level(project: Project, vi_norm: float) -> Level:
    return classify(vi_norm, project.vuln_thresholds, VULNERABILITY_LEVELS)


def damage_level(project: Project, d: float) -> Level:
    return classify(d, project.damage_thresholds, DAMAGE_LEVELS)


def _compute_damages(project: Project, ag: float) -> dict[int, DamageEntry]:
    """Damage entry for every building currently holding a normalized index."""
    out: dict[int, DamageEntry] = {}
    for bid in sorted(project.buildings):
        b = project.buildings[bid]
        if b.vi_norm is None:
            continue
        d = damage_index(b.vi_norm, ag)
        out[bid] = DamageEntry(d=d, level=damage_level(project, d).name)
    return out


def define_scenario(
    project: Project,
    ag: float,
    name: str = "",
    meta: Optional[ScenarioMeta] = None,
) -> tuple[Project, Scenario]:
    """Register a new earthquake what-if and evaluate damages immediately.

    The acceleration must be new to the project; equality is checked on the
    canonical decimal form, without tolerance.
    """
    if ag <= 0:
        raise OutOfRange(f"acceleration ratio must be > 0, got {ag}")
    key = canonical_ag(ag)
    for s in project.scenarios:
        if canonical_ag(s.ag) == key:
            raise DuplicateAcceleration(ag)
    sid = f"S{len(project.scenarios) + 1}"
    scenario = Scenario(
        id=sid,
        name=name or f"sismo a/g={key}",
        ag=float(ag),
        meta=meta,
        damages=_compute_damages(project, float(ag)),
    )
    return project.with_scenario(scenario), scenario


def run_scenario(project: Project, scenario_id: str) -> tuple[Project, Scenario]:
    """Rebuild a scenario's damage map from the current building indices."""
    if project.stale:
        raise StaleProject(f"results outdated ({project.stale_reason}); recompute first")
    current = project.scenario(scenario_id)
    if current is None:
        raise UnknownScenario(scenario_id)
    updated = replace(current, damages=_compute_damages(project, current.ag))
    return project.with_scenario(updated), updated


def recompute_building_vi(project: Project) -> Project:
    """Refresh every directly-surveyed building's index from its stored survey."""
    changed = []
    for b in project.buildings.values():
        if b.survey is not None and b.vi_source is ViSource.Direct:
            vi = compute_vi(b.survey.classes, project.scale)
            changed.append(dataclasses.replace(
                b, vi=vi, vi_norm=normalize_vi(vi, project.scale)))
    return project.with_buildings(changed)
