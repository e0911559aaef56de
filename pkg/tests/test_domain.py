from __future__ import annotations

import itertools

import pytest

from vulnesis.domain import (
    DEFAULT_SCALE,
    Building,
    BuildingKind,
    MapLayer,
    LayerFeature,
    LayerKind,
    Project,
    ProjectState,
    SurveyRecord,
    advance_state,
    canonical_ag,
    clear_stale,
    mark_stale,
)
from vulnesis.errors import IllegalTransition

from conftest import make_cadastral, make_key, make_project


SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0))


class TestStateMachine:
    def test_adjacent_transition_ok(self):
        p = make_project()
        p2 = advance_state(p, ProjectState.TypesReconciled)
        assert p2.state is ProjectState.TypesReconciled
        assert p.state is ProjectState.Created  # original untouched

    def test_skipping_states_rejected(self):
        p = make_project()
        with pytest.raises(IllegalTransition):
            advance_state(p, ProjectState.Sampled)

    def test_uploading_to_closed_is_legal(self):
        p = make_project(state=ProjectState.UploadingResults)
        assert advance_state(p, ProjectState.Closed).state is ProjectState.Closed

    def test_exhaustive_enumeration_of_all_49_pairs(self):
        accepted = []
        for src, dst in itertools.product(ProjectState, repeat=2):
            p = make_project(state=src)
            try:
                advance_state(p, dst)
                accepted.append((src, dst))
            except IllegalTransition:
                pass
        chain = list(ProjectState)
        expected = set(zip(chain, chain[1:])) | {
            (ProjectState.UploadingResults, ProjectState.Closed)
        }
        assert set(accepted) == expected
        assert len(accepted) == len(expected)

    def test_no_backward_moves(self):
        p = make_project(state=ProjectState.FieldWork)
        with pytest.raises(IllegalTransition):
            advance_state(p, ProjectState.Sampled)


class TestStaleness:
    def test_mark_stale_records_reason(self):
        p = mark_stale(make_project(), "weights changed")
        assert p.stale and p.stale_reason == "weights changed"

    def test_mark_stale_replaces_reason(self):
        p = mark_stale(mark_stale(make_project(), "weights changed"), "scale K changed")
        assert p.stale and p.stale_reason == "scale K changed"

    def test_clear_stale(self):
        p = clear_stale(mark_stale(make_project(), "x"))
        assert not p.stale and p.stale_reason == ""


class TestProjectInvariants:
    def test_default_scale_maximum(self):
        assert DEFAULT_SCALE.max_vi() == 382.5

    def test_vuln_thresholds_must_ascend(self):
        with pytest.raises(ValueError):
            make_project(vuln_thresholds=(66.6, 33.3))

    def test_vuln_thresholds_must_be_inside_domain(self):
        with pytest.raises(ValueError):
            make_project(vuln_thresholds=(0.0, 50.0))

    def test_damage_thresholds_must_ascend_within_unit_interval(self):
        with pytest.raises(ValueError):
            make_project(damage_thresholds=(0.15, 0.35, 0.35, 0.9))
        with pytest.raises(ValueError):
            make_project(damage_thresholds=(0.15, 0.35, 0.6, 1.0))

    def test_cutoff_year_defaults_to_1972(self):
        assert make_project().cutoff_year == 1972


class TestBuildingInvariants:
    def test_independent_cannot_carry_subtypology(self):
        from conftest import subkey

        with pytest.raises(ValueError):
            Building(id=1, kind=BuildingKind.Independent, subtypology=subkey())

    def test_independent_cannot_carry_cadastral_key(self):
        with pytest.raises(ValueError):
            Building(id=1, kind=BuildingKind.Independent, cadastral_key=make_key())

    def test_cadastral_requires_key(self):
        with pytest.raises(ValueError):
            Building(id=1, kind=BuildingKind.Cadastral)

    def test_surveyed_requires_survey_record(self):
        with pytest.raises(ValueError):
            make_cadastral(1, surveyed=True)

    def test_vi_and_vi_norm_set_together(self):
        import dataclasses

        with pytest.raises(ValueError):
            dataclasses.replace(make_cadastral(1), vi=10.0)


class TestSurveyRecord:
    def test_exactly_eleven_classes(self):
        with pytest.raises(ValueError):
            SurveyRecord(classes=tuple("A" * 10))
        with pytest.raises(ValueError):
            SurveyRecord(classes=tuple("A" * 12))

    def test_classes_restricted_to_a_through_d(self):
        with pytest.raises(ValueError):
            SurveyRecord(classes=tuple("A" * 10 + "E"))

    def test_raw_measurements_nonnegative(self):
        with pytest.raises(ValueError):
            SurveyRecord(classes=tuple("A" * 11), raw={"At": -5.0})
        rec = SurveyRecord(classes=tuple("A" * 11), raw={"b1": 1.7})  # ratios may exceed 1
        assert rec.raw["b1"] == 1.7


class TestMapLayer:
    def test_ring_must_be_closed(self):
        with pytest.raises(ValueError):
            MapLayer(LayerKind.Blocks, (LayerFeature("B1", (SQUARE[:-1],)),))

    def test_ring_needs_four_positions(self):
        with pytest.raises(ValueError):
            MapLayer(LayerKind.Blocks, (LayerFeature("B1", ((SQUARE[0], SQUARE[1], SQUARE[0]),)),))

    def test_project_area_single_feature(self):
        with pytest.raises(ValueError):
            MapLayer(
                LayerKind.ProjectArea,
                (LayerFeature("a", (SQUARE,)), LayerFeature("b", (SQUARE,))),
            )


def test_canonical_acceleration_form():
    assert canonical_ag(0.30) == canonical_ag(0.3)
    assert canonical_ag(0.1 + 0.2) != canonical_ag(0.3)
