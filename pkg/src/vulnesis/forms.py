"""Field-work report generation.

Two CSV documents: the full building table with blank coordinate/photo
columns to fill in on site, and the survey form sheet for the selected
buildings with blank parameter classes, the raw-measurement columns of the
field form, and the cadastral values to double-check.
"""

from __future__ import annotations

import csv
import io

from .domain import RAW_FIELDS, Project, ProjectState
from .errors import WrongState

BUILDINGS_REPORT_COLUMNS = (
    "id", "kind", "dep", "centro", "distrito", "manzana", "lote", "edificacion",
    "pared", "techo", "uso", "estado", "anio", "selected_for_survey",
    "x", "y", "photo",
)

SURVEY_REPORT_COLUMNS = (
    ("id", "dep", "centro", "distrito", "manzana", "lote", "edificacion",
     "pared", "techo", "uso", "estado", "anio")
    + tuple(f"p{i}" for i in range(1, 12))
    + RAW_FIELDS
    + ("observer", "date")
)


def export_field_forms(project: Project) -> dict[str, str]:
    """CSV documents for the field crews: ``buildings`` and ``survey``."""
    if project.state < ProjectState.Sampled:
        raise WrongState(
            f"field forms are printed after sampling, project is {project.state.name}")

    buildings_csv = io.StringIO()
    writer = csv.writer(buildings_csv, lineterminator="\n")
    writer.writerow(BUILDINGS_REPORT_COLUMNS)
    for bid in sorted(project.buildings):
        b = project.buildings[bid]
        key = b.cadastral_key.parts() if b.cadastral_key else ("",) * 6
        writer.writerow((
            b.id, b.kind.value, *key,
            b.wall_type, b.roof_type, b.use_type, b.state_type,
            b.construction_year if b.construction_year is not None else "",
            "1" if b.selected_for_survey else "0",
            "", "", "",  # x, y, photo: captured on site
        ))

    survey_csv = io.StringIO()
    writer = csv.writer(survey_csv, lineterminator="\n")
    writer.writerow(SURVEY_REPORT_COLUMNS)
    blank_classes = ("",) * 11
    blank_raws = ("",) * len(RAW_FIELDS)
    for bid in sorted(project.buildings):
        b = project.buildings[bid]
        if not b.selected_for_survey:
            continue
        key = b.cadastral_key.parts() if b.cadastral_key else ("",) * 6
        writer.writerow((
            b.id, *key,
            b.wall_type, b.roof_type, b.use_type, b.state_type,
            b.construction_year if b.construction_year is not None else "",
            *blank_classes, *blank_raws, "", "",
        ))

    return {"buildings": buildings_csv.getvalue(), "survey": survey_csv.getvalue()}
