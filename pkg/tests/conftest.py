from __future__ import annotations

import dataclasses

import pytest

from vulnesis.domain import (
    Building,
    BuildingKind,
    CadastralKey,
    Project,
    SubTypologyKey,
    SurveyRecord,
    ViSource,
)


def make_key(dep="10", centro="03", distrito="D1", manzana="001", lote="001", edif="01"):
    return CadastralKey(dep, centro, distrito, manzana, lote, edif)


def make_cadastral(
    bid: int,
    *,
    manzana: str = "001",
    lote: str = "001",
    edif: str = "01",
    wall: str = "BLOQUE",
    roof: str = "ZINC",
    use: str = "VIVIENDA",
    state: str = "BUENO",
    year: int = 1980,
    vi_norm: float | None = None,
    coord: tuple[float, float] | None = None,
    **kw,
) -> Building:
    vi = None if vi_norm is None else vi_norm * 3.825
    subtypology = kw.pop("subtypology", None)
    return Building(
        id=bid,
        kind=BuildingKind.Cadastral,
        cadastral_key=make_key(manzana=manzana, lote=lote, edif=edif),
        wall_type=wall,
        roof_type=roof,
        use_type=use,
        state_type=state,
        construction_year=year,
        subtypology=subtypology,
        vi=vi,
        vi_norm=vi_norm,
        vi_source=ViSource.Direct if vi_norm is not None else ViSource.NONE,
        coord=coord,
        **kw,
    )


def make_survey(classes: str = "A" * 11, **kw) -> SurveyRecord:
    return SurveyRecord(classes=tuple(classes), **kw)


def surveyed_cadastral(bid: int, classes: str, vi: float, vi_norm: float, **kw) -> Building:
    b = make_cadastral(bid, **kw)
    return dataclasses.replace(
        b,
        survey=make_survey(classes),
        surveyed=True,
        selected_for_survey=True,
        vi=vi,
        vi_norm=vi_norm,
        vi_source=ViSource.Direct,
    )


def make_project(pid: str = "p1", buildings: list[Building] = (), **kw) -> Project:
    project = Project(id=pid, name="test project", **kw)
    return project.with_buildings(buildings)


def subkey(wall="BLOQUE", roof="ZINC", use="VIVIENDA", state="BUENO", pre=False):
    return SubTypologyKey(wall, roof, use, state, pre)


def make_masters(
    walls=("BLOQUE", "MADERA", "LADRILLO"),
    roofs=("ZINC", "TEJA"),
    uses=("VIVIENDA", "COMERCIO"),
    states=("BUENO", "REGULAR", "MALO"),
):
    from vulnesis.domain import TypeEntry, TypeMasters

    return TypeMasters(categories={
        "Wall": tuple(TypeEntry(c, c.title()) for c in walls),
        "Roof": tuple(TypeEntry(c, c.title()) for c in roofs),
        "Use": tuple(TypeEntry(c, c.title()) for c in uses),
        "State": tuple(TypeEntry(c, c.title()) for c in states),
    })


def square_ring(cx: float, cy: float, half: float = 0.5):
    return [
        [cx - half, cy - half], [cx + half, cy - half],
        [cx + half, cy + half], [cx - half, cy + half], [cx - half, cy - half],
    ]


def polygon_feature(key: str, ring, key_property: str = "key"):
    return {
        "type": "Feature",
        "properties": {key_property: key},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


def feature_collection(features):
    return {"type": "FeatureCollection", "features": features}


def random_project(rng, pid: str | None = None) -> Project:
    """Draw a structurally valid project exercising every persisted field."""
    import json as _json

    from vulnesis.domain import LayerKind, ProjectState, Typology
    from vulnesis.ingest import load_cartography
    from vulnesis.risk import compute_vi, define_scenario, denormalize_vi, normalize_vi
    from vulnesis.domain import DEFAULT_SCALE

    pid = pid or f"proj{rng.randrange(10**9)}"
    walls = ["BLOQUE", "MADERA", "ADOBE"]
    keys = [subkey(wall=w, pre=pre) for w in walls for pre in (False, True)]
    typology_ids = ["T1", "T2"]

    buildings = []
    n = rng.randint(0, 40)
    for bid in range(1, n + 1):
        if rng.random() < 0.15:
            b = Building(
                id=bid,
                kind=BuildingKind.Independent,
                wall_type=rng.choice(walls),
                coord=(rng.uniform(0, 10), rng.uniform(0, 10)) if rng.random() < 0.7 else None,
                photo_id=f"P{bid:04d}" if rng.random() < 0.5 else None,
            )
            if rng.random() < 0.5:
                classes = tuple(rng.choice("ABCD") for _ in range(11))
                vi = compute_vi(classes, DEFAULT_SCALE)
                b = dataclasses.replace(
                    b, survey=make_survey("".join(classes)), surveyed=True,
                    vi=vi, vi_norm=normalize_vi(vi, DEFAULT_SCALE), vi_source=ViSource.Direct)
        else:
            key = rng.choice(keys)
            b = make_cadastral(
                bid,
                manzana=f"M{rng.randint(1, 4)}",
                lote=f"{bid:04d}",
                wall=key.wall_type,
                year=1950 if key.pre_cutoff else 1990,
                coord=(rng.uniform(0, 10), rng.uniform(0, 10)) if rng.random() < 0.5 else None,
            )
            b = dataclasses.replace(
                b, subtypology=key,
                typology_id=rng.choice(typology_ids) if rng.random() < 0.8 else None,
                selected_for_survey=rng.random() < 0.4,
                edited=rng.random() < 0.2,
                photo_id=f"P{bid:04d}" if rng.random() < 0.3 else None,
            )
            roll = rng.random()
            if roll < 0.35:
                classes = tuple(rng.choice("ABCD") for _ in range(11))
                vi = compute_vi(classes, DEFAULT_SCALE)
                b = dataclasses.replace(
                    b, survey=make_survey("".join(classes), raw={"N": float(rng.randint(1, 3))},
                                          observer_id="obs", date="2006-10-02"),
                    surveyed=True, selected_for_survey=True,
                    vi=vi, vi_norm=normalize_vi(vi, DEFAULT_SCALE), vi_source=ViSource.Direct)
            elif roll < 0.5:
                vn = rng.uniform(0, 100)
                b = dataclasses.replace(
                    b, vi_norm=vn, vi=denormalize_vi(vn, DEFAULT_SCALE),
                    vi_source=ViSource.Propagated)
            if rng.random() < 0.1:
                b = dataclasses.replace(b, extra={"x_note": f"note-{bid}"})
        buildings.append(b)

    p = make_project(
        pid=pid,
        buildings=buildings,
        description="random fixture",
        author="generator",
        date="2026-08-11",
        state=rng.choice(list(ProjectState)),
        cutoff_year=rng.choice((1960, 1972)),
        masters=make_masters(),
        extra={"x_origin": "generator"} if rng.random() < 0.5 else {},
    )
    half = frozenset(k for k in keys if not k.pre_cutoff)
    p = dataclasses.replace(p, typologies=(
        Typology(id="T1", name="Tipologia1", subtypology_keys=half,
                 sample_quota=float(rng.randint(1, 5)) if rng.random() < 0.5 else None),
        Typology(id="T2", name="Tipologia2",
                 subtypology_keys=frozenset(keys) - half,
                 description="second group"),
    ))
    for _ in range(rng.randint(0, 3)):
        try:
            p, _ = define_scenario(p, ag=round(rng.uniform(0.05, 1.0), 3),
                                   name=f"quake-{rng.randrange(100)}")
        except Exception:
            pass
    if rng.random() < 0.6:
        fc = feature_collection([
            polygon_feature(f"M{i}", square_ring(i * 2.0, 0.0)) for i in range(1, 5)
        ])
        p, _ = load_cartography(p, _json.dumps(fc), LayerKind.Blocks, "key")
    if rng.random() < 0.4:
        fc = feature_collection([polygon_feature("area", square_ring(5.0, 5.0, 20.0))])
        p, _ = load_cartography(p, _json.dumps(fc), LayerKind.ProjectArea, "key")
    return p


@pytest.fixture
def empty_project() -> Project:
    return make_project()
