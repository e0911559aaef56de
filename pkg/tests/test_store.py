from __future__ import annotations

import json
import random

import pytest

from vulnesis.errors import (
    CorruptFile,
    LockHeld,
    SchemaTooNew,
    UnknownKind,
    UnknownProject,
)
from vulnesis.ingest import register_type
from vulnesis.store import (
    BUILDINGS_FILE,
    LOCK_FILE,
    PROJECT_FILE,
    list_projects,
    load_project,
    load_system_masters,
    project_lock,
    save_project,
    save_system_masters,
)

from conftest import make_cadastral, make_masters, make_project, random_project


class TestSaveLoad:
    def test_fresh_project_directory_layout(self, tmp_path):
        directory = save_project(make_project(), tmp_path)
        files = {p.name for p in directory.iterdir()}
        assert files == {"project.json", "buildings.jsonl", "typologies.json",
                         "scenarios.json", "masters.json", "cartography"}

    def test_save_twice_is_byte_identical(self, tmp_path):
        p = random_project(random.Random(4))
        d1 = save_project(p, tmp_path)
        snapshot = {f.name: f.read_bytes() for f in d1.rglob("*") if f.is_file()}
        save_project(p, tmp_path)
        again = {f.name: f.read_bytes() for f in d1.rglob("*") if f.is_file()}
        assert snapshot == again

    def test_round_trip_structural_identity(self, tmp_path):
        rng = random.Random(1001)
        for i in range(25):
            p = random_project(rng, pid=f"rt{i}")
            save_project(p, tmp_path)
            assert load_project(tmp_path, p.id) == p

    def test_no_temp_files_left_behind(self, tmp_path):
        p = random_project(random.Random(9))
        directory = save_project(p, tmp_path)
        assert not list(directory.rglob("*.tmp"))
        assert not (directory / LOCK_FILE).exists()

    def test_unknown_discriminator_rejected(self, tmp_path):
        p = make_project(buildings=[make_cadastral(1)])
        directory = save_project(p, tmp_path)
        lines = (directory / BUILDINGS_FILE).read_text().splitlines()
        doc = json.loads(lines[0])
        doc["kind"] = "Mystery"
        (directory / BUILDINGS_FILE).write_text(json.dumps(doc) + "\n")
        with pytest.raises(UnknownKind):
            load_project(tmp_path, p.id)

    def test_schema_too_new_rejected(self, tmp_path):
        p = make_project()
        directory = save_project(p, tmp_path)
        doc = json.loads((directory / PROJECT_FILE).read_text())
        doc["schema_version"] = 99
        (directory / PROJECT_FILE).write_text(json.dumps(doc))
        with pytest.raises(SchemaTooNew):
            load_project(tmp_path, p.id)

    def test_corrupt_file_reports_position(self, tmp_path):
        p = make_project(buildings=[make_cadastral(1), make_cadastral(2, lote="002")])
        directory = save_project(p, tmp_path)
        lines = (directory / BUILDINGS_FILE).read_text().splitlines()
        lines[1] = "{broken"
        (directory / BUILDINGS_FILE).write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptFile) as err:
            load_project(tmp_path, p.id)
        assert err.value.position == "line 2"

    def test_unknown_project(self, tmp_path):
        with pytest.raises(UnknownProject):
            load_project(tmp_path, "missing")

    def test_unknown_fields_survive_round_trip(self, tmp_path):
        p = make_project()
        directory = save_project(p, tmp_path)
        doc = json.loads((directory / PROJECT_FILE).read_text())
        doc["x_future_field"] = {"anything": [1, 2, 3]}
        (directory / PROJECT_FILE).write_text(json.dumps(doc))
        loaded = load_project(tmp_path, p.id)
        assert loaded.extra["x_future_field"] == {"anything": [1, 2, 3]}
        save_project(loaded, tmp_path)
        doc2 = json.loads((directory / PROJECT_FILE).read_text())
        assert doc2["x_future_field"] == {"anything": [1, 2, 3]}


class TestLocking:
    def test_second_writer_receives_lock_held(self, tmp_path):
        p = make_project()
        with project_lock(tmp_path, p.id):
            with pytest.raises(LockHeld):
                save_project(p, tmp_path)

    def test_lock_released_after_save(self, tmp_path):
        p = make_project()
        save_project(p, tmp_path)
        save_project(p, tmp_path)  # would raise if the lock leaked


class TestInventory:
    def test_lists_projects(self, tmp_path):
        save_project(make_project(pid="a"), tmp_path)
        save_project(make_project(pid="b"), tmp_path)
        entries, errors = list_projects(tmp_path)
        assert [e.id for e in entries] == ["a", "b"] and errors == []

    def test_empty_root(self, tmp_path):
        entries, errors = list_projects(tmp_path)
        assert entries == [] and errors == []

    def test_corrupt_directory_reported_not_skipped(self, tmp_path):
        save_project(make_project(pid="good"), tmp_path)
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / PROJECT_FILE).write_text("{nope")
        entries, errors = list_projects(tmp_path)
        assert [e.id for e in entries] == ["good"]
        assert len(errors) == 1 and errors[0].id == "bad"


class TestSystemMasters:
    def test_round_trip(self, tmp_path):
        from vulnesis.domain import SystemMasters, TypologyMasterEntry

        masters = SystemMasters(
            types=register_type(make_masters(), "Wall", "TAPIAL", "rammed earth"),
            typologies=(TypologyMasterEntry("M1", "Adobe houses", "desc"),),
        )
        save_system_masters(masters, tmp_path)
        assert load_system_masters(tmp_path) == masters

    def test_missing_file_gives_empty_masters(self, tmp_path):
        from vulnesis.domain import SystemMasters

        assert load_system_masters(tmp_path) == SystemMasters()
