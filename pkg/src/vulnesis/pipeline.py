"""Project-level composite operations: creation, guarded workflow advancement,
scale changes with staleness, and the recompute pass that clears staleness.

These wrap the per-module operations so the CLI and HTTP service stay thin
adapters over one shared code path.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import re
from typing import Optional

from . import ingest, risk, typology
from .domain import (
    DEFAULT_SCALE,
    Project,
    ProjectState,
    SystemMasters,
    ViSource,
    VulnerabilityScale,
    advance_state,
    clear_stale,
    mark_stale,
)
from .errors import InvalidScale, WrongState


def _slug(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "project"


def create_project(
    name: str,
    system: SystemMasters,
    *,
    project_id: Optional[str] = None,
    description: str = "",
    author: str = "",
    date: Optional[str] = None,
    cutoff_year: int = 1972,
    scale: VulnerabilityScale = DEFAULT_SCALE,
) -> Project:
    """New project in state Created, with the system type masters copied in."""
    problems = risk.validate_scale(scale)
    if problems:
        raise InvalidScale("; ".join(problems))
    return Project(
        id=project_id or _slug(name),
        name=name,
        description=description,
        author=author,
        date=date or _dt.date.today().isoformat(),
        cutoff_year=cutoff_year,
        scale=scale,
        masters=system.types,
    )


def register_type(
    project: Project, system: SystemMasters, category: str, code: str, label: str
) -> tuple[Project, SystemMasters]:
    """Add a new canonical code to the project masters and the system masters."""
    masters = ingest.register_type(project.masters, category, code, label)
    if system.types.resolve(category, code) is None:
        system = dataclasses.replace(
            system, types=ingest.register_type(system.types, category, code, label))
    return dataclasses.replace(project, masters=masters), system


def add_alias(
    project: Project, system: SystemMasters, category: str, alias: str, code: str
) -> tuple[Project, SystemMasters]:
    masters = ingest.add_alias(project.masters, category, alias, code)
    if system.types.resolve(category, code) is not None:
        system = dataclasses.replace(
            system, types=ingest.add_alias(system.types, category, alias, code))
    return dataclasses.replace(project, masters=masters), system


def advance_project(project: Project, target: ProjectState) -> Project:
    """State transition with the per-target guards of the workflow.

    Leaving Created runs reconciliation completion + subtypology discovery;
    reaching TypologiesDefined requires at least one typology; Sampled is
    normally reached through the sampling operation itself.
    """
    if target is ProjectState.TypesReconciled and project.state is ProjectState.Created:
        project = ingest.apply_reconciliation(project)
        project, _ = ingest.discover_subtypologies(project)
        return advance_state(project, target)
    if target is ProjectState.TypologiesDefined:
        if not project.typologies:
            raise WrongState("define at least one typology before advancing")
        return advance_state(project, target)
    if target is ProjectState.Sampled and project.state is ProjectState.TypologiesDefined:
        if not any(b.selected_for_survey for b in project.buildings.values()):
            raise WrongState("run the sampling operation to reach Sampled")
        return advance_state(project, target)
    return advance_state(project, target)


def set_scale(project: Project, scale: VulnerabilityScale) -> Project:
    """Replace the vulnerability scale; flags results stale if any index exists."""
    problems = risk.validate_scale(scale)
    if problems:
        raise InvalidScale("; ".join(problems))
    if scale == project.scale:
        return project
    project = dataclasses.replace(project, scale=scale)
    if project.has_any_vi():
        project = mark_stale(project, "vulnerability scale changed after indices were computed")
    return project


def set_thresholds(
    project: Project,
    vuln: Optional[tuple[float, float]] = None,
    damage: Optional[tuple[float, float, float, float]] = None,
) -> Project:
    changes = {}
    if vuln is not None:
        changes["vuln_thresholds"] = tuple(vuln)
    if damage is not None:
        changes["damage_thresholds"] = tuple(damage)
    return dataclasses.replace(project, **changes) if changes else project


def recompute(project: Project) -> Project:
    """Full refresh after a scale change: direct indices from stored surveys,
    re-propagation where propagation had been applied, scenario reruns; the
    stale flag is cleared."""
    project = risk.recompute_building_vi(project)
    if any(b.vi_source is ViSource.Propagated for b in project.buildings.values()):
        project, _ = typology.propagate_vi(project)
    project = clear_stale(project)
    for scenario in project.scenarios:
        project, _ = risk.run_scenario(project, scenario.id)
    return project
