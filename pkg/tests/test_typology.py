from __future__ import annotations

import dataclasses
import random

import pytest

from vulnesis.domain import ProjectState, SystemMasters, ViSource
from vulnesis.errors import (
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
from vulnesis.typology import (
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

from conftest import make_cadastral, make_project, subkey, surveyed_cadastral


def tagged(bid, key, tid, **kw):
    return dataclasses.replace(make_cadastral(bid, **kw), subtypology=key, typology_id=tid)


def project_with_keys():
    """Two discovered keys, no typologies yet, state TypesReconciled."""
    k1, k2 = subkey(wall="BLOQUE"), subkey(wall="MADERA")
    buildings = [
        dataclasses.replace(make_cadastral(1, wall="BLOQUE"), subtypology=k1),
        dataclasses.replace(make_cadastral(2, wall="BLOQUE", lote="002"), subtypology=k1),
        dataclasses.replace(make_cadastral(3, wall="MADERA", lote="003"), subtypology=k2),
    ]
    return make_project(state=ProjectState.TypesReconciled, buildings=buildings), k1, k2


class TestCreateImportDelete:
    def test_create_empty_typology(self):
        p, _, _ = project_with_keys()
        p, system, t = create_typology(p, SystemMasters(), "Tipologia4", "confined masonry")
        assert t.name == "Tipologia4" and t.subtypology_keys == frozenset()
        assert p.typology(t.id) is not None
        assert any(m.name == "Tipologia4" for m in system.typologies)

    def test_duplicate_name_rejected(self):
        p, _, _ = project_with_keys()
        p, system, _ = create_typology(p, SystemMasters(), "Tipologia4")
        with pytest.raises(DuplicateName):
            create_typology(p, system, "Tipologia4")

    def test_wrong_state_rejected(self):
        with pytest.raises(WrongState):
            create_typology(make_project(), SystemMasters(), "T")  # still Created
        p = make_project(state=ProjectState.Sampled)
        with pytest.raises(WrongState):
            create_typology(p, SystemMasters(), "T")

    def test_import_from_master(self):
        p, _, _ = project_with_keys()
        _, system, _ = create_typology(p, SystemMasters(), "Adobe houses")
        master_id = system.typologies[0].id
        p2, t = import_master_typology(p, system, master_id)
        assert t.name == "Adobe houses" and t.subtypology_keys == frozenset()

    def test_import_twice_duplicate_name(self):
        p, _, _ = project_with_keys()
        _, system, _ = create_typology(p, SystemMasters(), "Adobe houses")
        p, _ = import_master_typology(p, system, system.typologies[0].id)
        with pytest.raises(DuplicateName):
            import_master_typology(p, system, system.typologies[0].id)

    def test_import_unknown_master(self):
        p, _, _ = project_with_keys()
        with pytest.raises(UnknownMaster):
            import_master_typology(p, SystemMasters(), "M99")

    def test_delete_returns_keys_to_pool(self):
        p, k1, k2 = project_with_keys()
        p, system, t = create_typology(p, SystemMasters(), "T")
        p, _ = assign_subtypologies(p, t.id, [k1, k2])
        assert p.unassigned_keys() == set()
        p = delete_typology(p, t.id)
        assert p.unassigned_keys() == {k1, k2}
        assert all(b.typology_id is None for b in p.buildings.values())

    def test_delete_empty_typology_touches_nothing(self):
        p, _, _ = project_with_keys()
        p, _, t = create_typology(p, SystemMasters(), "T")
        before = p.buildings
        p = delete_typology(p, t.id)
        assert p.buildings == before

    def test_delete_unknown(self):
        p, _, _ = project_with_keys()
        with pytest.raises(UnknownTypology):
            delete_typology(p, "T99")


class TestAssignment:
    def test_assign_two_free_keys(self):
        p, k1, k2 = project_with_keys()
        p, _, t = create_typology(p, SystemMasters(), "T")
        p, t = assign_subtypologies(p, t.id, [k1, k2])
        assert len(t.subtypology_keys) == 2
        assert all(b.typology_id == t.id for b in p.buildings.values())

    def test_assign_key_held_elsewhere(self):
        p, k1, _ = project_with_keys()
        p, system, t1 = create_typology(p, SystemMasters(), "T1")
        p, system, t2 = create_typology(p, system, "T2")
        p, _ = assign_subtypologies(p, t1.id, [k1])
        with pytest.raises(KeyAlreadyAssigned) as err:
            assign_subtypologies(p, t2.id, [k1])
        assert err.value.holder == t1.id

    def test_assign_undiscovered_key(self):
        p, _, _ = project_with_keys()
        p, _, t = create_typology(p, SystemMasters(), "T")
        with pytest.raises(KeyNotMember):
            assign_subtypologies(p, t.id, [subkey(wall="TAPIAL")])

    def test_unassign_then_reassign_retags_buildings(self):
        p, k1, k2 = project_with_keys()
        p, system, t1 = create_typology(p, SystemMasters(), "T1")
        p, system, t2 = create_typology(p, system, "T2")
        p, _ = assign_subtypologies(p, t1.id, [k1, k2])
        p, _ = unassign_subtypologies(p, t1.id, [k2])
        p, _ = assign_subtypologies(p, t2.id, [k2])

        # group-by oracle over buildings
        counts: dict[str, int] = {}
        for b in p.buildings.values():
            counts[b.typology_id] = counts.get(b.typology_id, 0) + 1
        assert counts == {t1.id: 2, t2.id: 1}

    def test_unassign_nonmember(self):
        p, k1, k2 = project_with_keys()
        p, _, t = create_typology(p, SystemMasters(), "T")
        p, _ = assign_subtypologies(p, t.id, [k1])
        with pytest.raises(KeyNotMember):
            unassign_subtypologies(p, t.id, [k2])

    def test_partition_invariant_under_random_ops(self):
        rng = random.Random(1234)
        p, k1, k2 = project_with_keys()
        keys = [k1, k2]
        system = SystemMasters()
        tids = []
        for name in ("T1", "T2", "T3"):
            p, system, t = create_typology(p, system, name)
            tids.append(t.id)
        for _ in range(120):
            op = rng.choice(("assign", "unassign", "delete", "recreate"))
            tid = rng.choice(tids)
            key = rng.choice(keys)
            try:
                if op == "assign":
                    p, _ = assign_subtypologies(p, tid, [key])
                elif op == "unassign":
                    p, _ = unassign_subtypologies(p, tid, [key])
                elif op == "delete":
                    p = delete_typology(p, tid)
                else:
                    if p.typology(tid) is None:
                        p, system, t = create_typology(p, system, f"re-{rng.random()}")
                        tids.append(t.id)
            except (KeyAlreadyAssigned, KeyNotMember, UnknownTypology):
                pass
            # invariant: assigned keys disjoint, assigned ∪ unassigned = discovered
            seen = set()
            for t in p.typologies:
                assert not (t.subtypology_keys & seen)
                seen |= t.subtypology_keys
            assert seen | p.unassigned_keys() == p.discovered_keys()
            # building tags agree with key membership
            for b in p.buildings.values():
                holder = next(
                    (t.id for t in p.typologies if b.subtypology in t.subtypology_keys), None)
                assert b.typology_id == holder


def sampling_project(members_per_block: dict[str, dict[str, int]], state=ProjectState.TypologiesDefined):
    """members_per_block: typology name -> {block manzana -> building count}."""
    buildings = []
    typologies = []
    bid = 0
    from vulnesis.domain import Typology

    for i, (tname, blocks) in enumerate(sorted(members_per_block.items()), start=1):
        key = subkey(wall=f"W{i}")
        tid = f"T{i}"
        typologies.append(Typology(id=tid, name=tname, subtypology_keys=frozenset([key])))
        for manzana, count in sorted(blocks.items()):
            for j in range(count):
                bid += 1
                buildings.append(tagged(bid, key, tid, manzana=manzana, lote=f"{bid:04d}",
                                        wall=f"W{i}"))
    p = make_project(state=state, buildings=buildings)
    return dataclasses.replace(p, typologies=tuple(typologies))


class TestSampling:
    def test_hundred_percent_selects_everyone(self):
        p = sampling_project({"A": {"M1": 3, "M2": 2}, "B": {"M3": 4}})
        p, report = sample(p, SampleSpec(SampleMode.PerTypologyPercent, 100, seed=1))
        assert all(b.selected_for_survey for b in p.buildings.values())
        assert p.state is ProjectState.Sampled

    def test_quota_exceeding_population(self):
        p = sampling_project({"A": {"M1": 6}})
        with pytest.raises(QuotaExceedsPopulation):
            sample(p, SampleSpec(SampleMode.PerTypologyCount, 10, seed=1))

    def test_block_coverage(self):
        p = sampling_project({"A": {f"M{i}": 3 for i in range(1, 6)}})  # 5 blocks
        p, report = sample(p, SampleSpec(SampleMode.PerTypologyCount, 4, seed=7))
        chosen = [p.building(i) for i in report.by_typology["T1"]]
        blocks = {b.cadastral_key.block_key() for b in chosen}
        assert len(blocks) == 4  # min(quota, blocks with candidates)

    def test_fixed_seed_reproducible(self):
        base = sampling_project({"A": {"M1": 10, "M2": 10}, "B": {"M3": 8}})
        spec = SampleSpec(SampleMode.PerTypologyPercent, 30, seed=123456789)
        _, r1 = sample(base, spec)
        _, r2 = sample(base, spec)
        assert r1.by_typology == r2.by_typology

    def test_selection_size_is_min_quota_population(self):
        rng = random.Random(5)
        for trial in range(20):
            blocks = {f"M{i}": rng.randint(1, 4) for i in range(1, rng.randint(2, 6))}
            p = sampling_project({"A": blocks})
            population = sum(blocks.values())
            quota = rng.randint(1, population)
            p2, report = sample(p, SampleSpec(SampleMode.PerTypologyCount, quota, seed=trial))
            assert len(report.by_typology["T1"]) == min(quota, population)
            selected = {b.id for b in p2.buildings.values() if b.selected_for_survey}
            assert selected == set(report.by_typology["T1"])

    def test_percent_ceiling_selects_at_least_one(self):
        p = sampling_project({"A": {"M1": 7}})
        _, report = sample(p, SampleSpec(SampleMode.PerTypologyPercent, 1, seed=3))
        assert len(report.by_typology["T1"]) == 1  # ceil(0.07)

    def test_total_count_split_sums_to_requested(self):
        p = sampling_project({"A": {"M1": 10}, "B": {"M2": 30}, "C": {"M3": 20}})
        _, report = sample(p, SampleSpec(SampleMode.TotalCount, 12, seed=11))
        assert len(report.selected) == 12
        # proportional-ish: largest typology gets the largest share
        sizes = {tid: len(ids) for tid, ids in report.by_typology.items()}
        assert sizes["T2"] >= sizes["T3"] >= sizes["T1"]

    def test_total_percent(self):
        p = sampling_project({"A": {"M1": 10}, "B": {"M2": 30}})
        _, report = sample(p, SampleSpec(SampleMode.TotalPercent, 10, seed=2))
        assert len(report.selected) == 4  # ceil(40 * 0.10)

    def test_per_typology_mapping_amounts(self):
        p = sampling_project({"A": {"M1": 5}, "B": {"M2": 5}})
        _, report = sample(p, SampleSpec(SampleMode.PerTypologyCount, {"T1": 2, "T2": 5}, seed=4))
        assert len(report.by_typology["T1"]) == 2
        assert len(report.by_typology["T2"]) == 5

    def test_wrong_state(self):
        p = sampling_project({"A": {"M1": 3}}, state=ProjectState.Created)
        with pytest.raises(WrongState):
            sample(p, SampleSpec(SampleMode.PerTypologyPercent, 50, seed=1))

    def test_unassigned_buildings_block_sampling(self):
        p = sampling_project({"A": {"M1": 3}})
        p = p.with_buildings([make_cadastral(99, manzana="MX", lote="9999")])
        with pytest.raises(UnassignedBuildingsRemain):
            sample(p, SampleSpec(SampleMode.PerTypologyPercent, 100, seed=1))

    def test_bad_percent_rejected(self):
        p = sampling_project({"A": {"M1": 3}})
        with pytest.raises(BadSampleSpec):
            sample(p, SampleSpec(SampleMode.PerTypologyPercent, 0, seed=1))
        with pytest.raises(BadSampleSpec):
            sample(p, SampleSpec(SampleMode.PerTypologyPercent, 101, seed=1))

    def test_selection_within_typology_members(self):
        p = sampling_project({"A": {"M1": 4}, "B": {"M2": 4}})
        _, report = sample(p, SampleSpec(SampleMode.PerTypologyCount, 2, seed=9))
        for tid, ids in report.by_typology.items():
            for bid in ids:
                assert p.building(bid).typology_id == tid


def propagation_project():
    k1, k2 = subkey(wall="W1"), subkey(wall="W2")
    from vulnesis.domain import Typology

    buildings = [
        surveyed_cadastral(1, "A" * 11, vi=76.5, vi_norm=20.0, wall="W1", lote="0001"),
        surveyed_cadastral(2, "A" * 11, vi=153.0, vi_norm=40.0, wall="W1", lote="0002"),
        make_cadastral(3, wall="W1", lote="0003"),
        make_cadastral(4, wall="W2", lote="0004"),
    ]
    buildings = [
        dataclasses.replace(b, subtypology=k1 if b.wall_type == "W1" else k2,
                            typology_id="T1" if b.wall_type == "W1" else "T2")
        for b in buildings
    ]
    p = make_project(state=ProjectState.UploadingResults, buildings=buildings)
    return dataclasses.replace(p, typologies=(
        Typology(id="T1", name="one", subtypology_keys=frozenset([k1])),
        Typology(id="T2", name="two", subtypology_keys=frozenset([k2])),
    ))


class TestPropagation:
    def test_mean_applied_to_unsurveyed_member(self):
        p, report = propagate_vi(propagation_project())
        b = p.building(3)
        assert b.vi_norm == pytest.approx(30.0)
        assert b.vi == pytest.approx(30.0 * 3.825)
        assert b.vi_source is ViSource.Propagated
        assert report.means["T1"] == pytest.approx(30.0)

    def test_typology_without_survey_is_listed(self):
        p, report = propagate_vi(propagation_project())
        assert report.without_survey == ("T2",)
        assert p.building(4).vi_norm is None
        assert p.building(4).vi_source is ViSource.NONE

    def test_surveyed_never_overwritten(self):
        p, _ = propagate_vi(propagation_project())
        assert p.building(1).vi_norm == 20.0
        assert p.building(1).vi_source is ViSource.Direct

    def test_nothing_surveyed(self):
        p = make_project(buildings=[make_cadastral(1)])
        with pytest.raises(NothingSurveyed):
            propagate_vi(p)

    def test_matches_group_by_mean_oracle(self):
        rng = random.Random(77)
        from vulnesis.domain import Typology

        for trial in range(20):
            n_typ = rng.randint(1, 4)
            keys = [subkey(wall=f"W{i}") for i in range(n_typ)]
            typologies = tuple(
                Typology(id=f"T{i}", name=f"t{i}", subtypology_keys=frozenset([keys[i]]))
                for i in range(n_typ)
            )
            buildings = []
            oracle: dict[str, list[float]] = {f"T{i}": [] for i in range(n_typ)}
            for bid in range(1, rng.randint(2, 50) + 1):
                i = rng.randrange(n_typ)
                if rng.random() < 0.4:
                    vn = rng.uniform(0, 100)
                    b = surveyed_cadastral(bid, "A" * 11, vi=vn * 3.825, vi_norm=vn,
                                           wall=f"W{i}", lote=f"{bid:05d}")
                    oracle[f"T{i}"].append(vn)
                else:
                    b = make_cadastral(bid, wall=f"W{i}", lote=f"{bid:05d}")
                buildings.append(dataclasses.replace(
                    b, subtypology=keys[i], typology_id=f"T{i}"))
            if not any(oracle.values()):
                continue
            p = make_project(pid=f"r{trial}", buildings=buildings,
                             state=ProjectState.UploadingResults)
            p = dataclasses.replace(p, typologies=typologies)
            p2, report = propagate_vi(p)
            for tid, values in oracle.items():
                members = [b for b in p2.buildings.values() if b.typology_id == tid]
                if values:
                    mean = sum(values) / len(values)
                    for m in members:
                        if m.surveyed:
                            continue
                        assert m.vi_norm == pytest.approx(mean, abs=1e-9)
                else:
                    assert tid in report.without_survey
                    assert all(m.vi_norm is None for m in members if not m.surveyed)


class TestStats:
    def test_mixed_survey_stats(self):
        from vulnesis.domain import Typology

        k = subkey()
        buildings = [
            surveyed_cadastral(1, "CAB" + "A" * 8, vi=27.5, vi_norm=27.5 / 3.825, lote="1"),
            surveyed_cadastral(2, "D" * 11, vi=382.5, vi_norm=100.0, lote="2"),
            make_cadastral(3, lote="3"),
        ]
        buildings = [dataclasses.replace(b, subtypology=k, typology_id="T1") for b in buildings]
        p = make_project(buildings=buildings)
        p = dataclasses.replace(p, typologies=(
            Typology(id="T1", name="t", subtypology_keys=frozenset([k])),))
        stats = typology_stats(p, "T1")
        assert stats.count == 3 and stats.surveyed == 2
        assert stats.total_vi == pytest.approx(410.0)
        assert stats.avg_vi_norm == pytest.approx((27.5 / 3.825 + 100.0) / 2)
        assert stats.level == "media"

    def test_no_surveyed_members(self):
        p, _, _ = project_with_keys()
        p, _, t = create_typology(p, SystemMasters(), "T")
        stats = typology_stats(p, t.id)
        assert stats.avg_vi_norm is None and stats.total_vi is None
        assert stats.level == "no-data"

    def test_single_all_a_survey(self):
        from vulnesis.domain import Typology

        k = subkey()
        b = dataclasses.replace(
            surveyed_cadastral(1, "A" * 11, vi=0.0, vi_norm=0.0),
            subtypology=k, typology_id="T1")
        p = make_project(buildings=[b])
        p = dataclasses.replace(p, typologies=(
            Typology(id="T1", name="t", subtypology_keys=frozenset([k])),))
        stats = typology_stats(p, "T1")
        assert stats.avg_vi_norm == 0.0 and stats.level == "baja"

    def test_unknown_typology(self):
        with pytest.raises(UnknownTypology):
            typology_stats(make_project(), "T9")
