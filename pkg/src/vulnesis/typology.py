"""Typology management, seeded block-stratified sampling, mean propagation
and per-typology statistics.

Sampling spreads each typology's quota across cadastral blocks: blocks holding
candidates are visited round-robin in a seed-shuffled order, drawing uniformly
without replacement inside each block. For a fixed (project, spec) the
selection is fully deterministic.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from . import risk
from .domain import (
    Building,
    BuildingKind,
    Project,
    ProjectState,
    SubTypologyKey,
    SystemMasters,
    Typology,
    TypologyMasterEntry,
    ViSource,
    advance_state,
)
from .errors import (
    BadSampleSpec,
    DuplicateName,
    KeyAlreadyAssigned,
    KeyNotMember,
    NothingSurveyed,
    QuotaExceedsPopulation,
    UnassignedBuildingsRemain,
    UnknownMaster,
    UnknownTypology,
    WrongState,
)


class SampleMode(enum.Enum):
    TotalCount = "TotalCount"
    TotalPercent = "TotalPercent"
    PerTypologyCount = "PerTypologyCount"
    PerTypologyPercent = "PerTypologyPercent"


Amount = Union[int, float, Mapping[str, Union[int, float]]]


@dataclass(frozen=True)
class SampleSpec:
    mode: SampleMode
    amount: Amount  # single value, or typology_id -> value for per-typology modes
    seed: int

    def __post_init__(self):
        if not (0 <= self.seed < 2 ** 64):
            raise BadSampleSpec(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class SampleReport:
    seed: int
    rng_id: str
    by_typology: Mapping[str, tuple[int, ...]]  # typology -> selected building ids

    @property
    def selected(self) -> tuple[int, ...]:
        return tuple(sorted(i for ids in self.by_typology.values() for i in ids))


@dataclass(frozen=True)
class PropagationReport:
    means: Mapping[str, float]              # typology -> mean applied
    updated: Mapping[str, tuple[int, ...]]  # typology -> buildings that received it
    without_survey: tuple[str, ...]         # typologies with zero surveyed members


@dataclass(frozen=True)
class TypologyStats:
    typology_id: str
    count: int
    surveyed: int
    avg_vi_norm: Optional[float]
    total_vi: Optional[float]
    level: str


def _next_typology_id(project: Project) -> str:
    taken = {t.id for t in project.typologies}
    n = len(project.typologies) + 1
    while f"T{n}" in taken:
        n += 1
    return f"T{n}"


def _check_definition_state(project: Project) -> None:
    if not (ProjectState.TypesReconciled <= project.state < ProjectState.Sampled):
        raise WrongState(
            f"typologies are defined between TypesReconciled and TypologiesDefined,"
            f" project is {project.state.name}")


def create_typology(
    project: Project, system: SystemMasters, name: str, description: str = ""
) -> tuple[Project, SystemMasters, Typology]:
    """Add an empty typology to the project and to the system master."""
    _check_definition_state(project)
    name = name.strip()
    if not name:
        raise DuplicateName("typology name must be non-empty")
    if any(t.name == name for t in project.typologies):
        raise DuplicateName(f"typology {name!r} already defined in project")
    typology = Typology(id=_next_typology_id(project), name=name, description=description)
    if not any(m.name == name for m in system.typologies):
        mid = f"M{len(system.typologies) + 1}"
        system = dataclasses.replace(
            system,
            typologies=system.typologies + (TypologyMasterEntry(mid, name, description),),
        )
    return project.with_typology(typology), system, typology


def import_master_typology(
    project: Project, system: SystemMasters, master_id: str
) -> tuple[Project, Typology]:
    """Copy a system-master typology into the project (name/description only)."""
    _check_definition_state(project)
    master = next((m for m in system.typologies if m.id == master_id), None)
    if master is None:
        raise UnknownMaster(f"no typology master with id {master_id}")
    if any(t.name == master.name for t in project.typologies):
        raise DuplicateName(f"typology {master.name!r} already defined in project")
    typology = Typology(id=_next_typology_id(project), name=master.name,
                        description=master.description)
    return project.with_typology(typology), typology


def _retag(project: Project, keys: set[SubTypologyKey], typology_id: Optional[str]) -> Project:
    changed = [
        dataclasses.replace(b, typology_id=typology_id)
        for b in project.buildings.values()
        if b.subtypology in keys and b.typology_id != typology_id
    ]
    return project.with_buildings(changed)


def assign_subtypologies(
    project: Project, typology_id: str, keys: list[SubTypologyKey]
) -> tuple[Project, Typology]:
    """Move unassigned subtypology keys into a typology; members get tagged."""
    typology = project.typology(typology_id)
    if typology is None:
        raise UnknownTypology(typology_id)
    discovered = project.discovered_keys()
    for key in keys:
        if key not in discovered:
            raise KeyNotMember(f"{key.label()} is not a discovered subtypology")
        for other in project.typologies:
            if key in other.subtypology_keys:
                raise KeyAlreadyAssigned(key.label(), other.id)
    typology = dataclasses.replace(
        typology, subtypology_keys=typology.subtypology_keys | frozenset(keys))
    project = _retag(project.with_typology(typology), set(keys), typology_id)
    return project, typology


def unassign_subtypologies(
    project: Project, typology_id: str, keys: list[SubTypologyKey]
) -> tuple[Project, Typology]:
    """Return keys to the unassigned pool; members lose their tag."""
    typology = project.typology(typology_id)
    if typology is None:
        raise UnknownTypology(typology_id)
    for key in keys:
        if key not in typology.subtypology_keys:
            raise KeyNotMember(f"{key.label()} is not a member of {typology_id}")
    typology = dataclasses.replace(
        typology, subtypology_keys=typology.subtypology_keys - frozenset(keys))
    project = _retag(project.with_typology(typology), set(keys), None)
    return project, typology


def delete_typology(project: Project, typology_id: str) -> Project:
    """Drop a typology; its keys return to the pool, members lose their tag."""
    typology = project.typology(typology_id)
    if typology is None:
        raise UnknownTypology(typology_id)
    remaining = tuple(t for t in project.typologies if t.id != typology_id)
    project = dataclasses.replace(project, typologies=remaining)
    return _retag(project, set(typology.subtypology_keys), None)


# --- sampling ---------------------------------------------------------------

def _members(project: Project, typology_id: str) -> list[Building]:
    return [
        b for b in project.buildings.values()
        if b.kind is BuildingKind.Cadastral and b.typology_id == typology_id
    ]


def _percent_quota(percent: float, population: int) -> int:
    if not (0 < percent <= 100):
        raise BadSampleSpec(f"percent must be in (0, 100], got {percent}")
    return min(population, math.ceil(percent * population / 100.0))


def _count_quota(count, typology_id: str, population: int) -> int:
    if not float(count).is_integer() or int(count) < 1:
        raise BadSampleSpec(f"count must be an integer >= 1, got {count}")
    count = int(count)
    if count > population:
        raise QuotaExceedsPopulation(typology_id, count, population)
    return count


def _proportional_split(total: int, populations: dict[str, int]) -> dict[str, int]:
    """Largest-remainder split of a project-wide quota, capped per typology."""
    grand = sum(populations.values())
    if grand == 0:
        return {tid: 0 for tid in populations}
    shares = {tid: total * pop / grand for tid, pop in populations.items()}
    quotas = {tid: min(populations[tid], int(share)) for tid, share in shares.items()}
    leftover = total - sum(quotas.values())
    order = sorted(
        populations,
        key=lambda tid: (-(shares[tid] - int(shares[tid])), tid),
    )
    while leftover > 0:
        progress = False
        for tid in order:
            if leftover == 0:
                break
            if quotas[tid] < populations[tid]:
                quotas[tid] += 1
                leftover -= 1
                progress = True
        if not progress:
            break
    return quotas


def _quotas(project: Project, spec: SampleSpec, populations: dict[str, int]) -> dict[str, int]:
    mode, amount = spec.mode, spec.amount
    if mode in (SampleMode.TotalCount, SampleMode.TotalPercent):
        if isinstance(amount, Mapping):
            raise BadSampleSpec("project-wide modes take a single value")
        total_pop = sum(populations.values())
        if mode is SampleMode.TotalCount:
            total = _count_quota(amount, "*", total_pop)
        else:
            total = _percent_quota(float(amount), total_pop)
        return _proportional_split(total, populations)

    values: Mapping[str, Union[int, float]]
    if isinstance(amount, Mapping):
        unknown = set(amount) - set(populations)
        if unknown:
            raise UnknownTypology(f"sample spec names unknown typologies: {sorted(unknown)}")
        values = amount
    else:
        values = {tid: amount for tid in populations}

    quotas: dict[str, int] = {}
    for tid, value in values.items():
        if mode is SampleMode.PerTypologyCount:
            quotas[tid] = _count_quota(value, tid, populations[tid])
        else:
            quotas[tid] = _percent_quota(float(value), populations[tid])
    return quotas


def _draw_typology(members: list[Building], quota: int, rng: random.Random) -> list[int]:
    """Round-robin over seed-shuffled blocks, uniform without replacement inside."""
    by_block: dict[str, list[int]] = {}
    for b in members:
        by_block.setdefault(b.cadastral_key.block_key(), []).append(b.id)
    block_order = sorted(by_block)
    rng.shuffle(block_order)
    for key in block_order:
        ids = sorted(by_block[key])
        rng.shuffle(ids)
        by_block[key] = ids
    chosen: list[int] = []
    while len(chosen) < quota:
        drew = False
        for key in block_order:
            if len(chosen) >= quota:
                break
            if by_block[key]:
                chosen.append(by_block[key].pop())
                drew = True
        if not drew:
            break
    return chosen


def sample(project: Project, spec: SampleSpec) -> tuple[Project, SampleReport]:
    """Select survey buildings per the spec and advance the workflow to Sampled."""
    if project.state is not ProjectState.TypologiesDefined:
        raise WrongState(f"sampling requires TypologiesDefined, project is {project.state.name}")
    unassigned = [
        b.id for b in project.buildings.values()
        if b.kind is BuildingKind.Cadastral and b.typology_id is None
    ]
    if unassigned:
        raise UnassignedBuildingsRemain(
            f"{len(unassigned)} cadastral buildings belong to no typology")

    members = {t.id: _members(project, t.id) for t in project.typologies}
    populations = {tid: len(ms) for tid, ms in members.items()}
    quotas = _quotas(project, spec, populations)

    rng = random.Random(spec.seed)
    by_typology: dict[str, tuple[int, ...]] = {}
    for tid in sorted(quotas):
        picked = _draw_typology(members[tid], quotas[tid], rng)
        by_typology[tid] = tuple(sorted(picked))

    selected = {i for ids in by_typology.values() for i in ids}
    changed = [
        dataclasses.replace(b, selected_for_survey=(b.id in selected))
        for b in project.buildings.values()
        if b.selected_for_survey != (b.id in selected)
    ]
    project = project.with_buildings(changed)
    project = dataclasses.replace(project, typologies=tuple(
        dataclasses.replace(t, sample_quota=float(quotas.get(t.id, 0)))
        for t in project.typologies
    ))
    project = advance_state(project, ProjectState.Sampled)
    return project, SampleReport(seed=spec.seed, rng_id=project.rng_id, by_typology=by_typology)


# --- propagation and statistics -------------------------------------------------

def propagate_vi(project: Project) -> tuple[Project, PropagationReport]:
    """Give every unsurveyed member the mean normalized index of its typology's
    directly-surveyed members; typologies without surveys are reported."""
    surveyed_any = [b for b in project.buildings.values() if b.surveyed]
    if not surveyed_any:
        raise NothingSurveyed("no surveyed building in the project")

    means: dict[str, float] = {}
    updated: dict[str, tuple[int, ...]] = {}
    without: list[str] = []
    changed: list[Building] = []
    for t in project.typologies:
        members = _members(project, t.id)
        direct = [b for b in members if b.surveyed and b.vi_norm is not None]
        if not direct:
            without.append(t.id)
            continue
        mean = sum(b.vi_norm for b in direct) / len(direct)
        touched = []
        for b in members:
            if b.surveyed:
                continue  # direct surveys are never overwritten
            changed.append(dataclasses.replace(
                b,
                vi_norm=mean,
                vi=risk.denormalize_vi(mean, project.scale),
                vi_source=ViSource.Propagated,
            ))
            touched.append(b.id)
        means[t.id] = mean
        updated[t.id] = tuple(sorted(touched))
    report = PropagationReport(means=means, updated=updated, without_survey=tuple(without))
    return project.with_buildings(changed), report


def typology_stats(project: Project, typology_id: str) -> TypologyStats:
    """Member counts plus average/total index over directly-surveyed members."""
    if project.typology(typology_id) is None:
        raise UnknownTypology(typology_id)
    members = _members(project, typology_id)
    direct = [b for b in members if b.surveyed and b.vi_norm is not None]
    if not direct:
        return TypologyStats(
            typology_id=typology_id, count=len(members), surveyed=0,
            avg_vi_norm=None, total_vi=None, level=risk.NO_DATA)
    avg = sum(b.vi_norm for b in direct) / len(direct)
    total = sum(b.vi for b in direct)
    level = risk.classify(avg, project.vuln_thresholds, risk.VULNERABILITY_LEVELS)
    return TypologyStats(
        typology_id=typology_id, count=len(members), surveyed=len(direct),
        avg_vi_norm=avg, total_vi=total, level=level.name)
