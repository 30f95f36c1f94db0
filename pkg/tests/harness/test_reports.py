import json
import math

import numpy as np
import pytest

from spectral_torus import errors
from spectral_torus.harness import plotting
from spectral_torus.harness import reports


def _bifurcation_rows() -> list[dict]:
    return [
        {"eps_m": -1e-3, "z1": 4.2e-4, "z2": 4.2e-4, "branch_norm": 0.08, "residual": 1e-13,
         "sigma": -1, "A": 10 / 9, "B": -52 / 15, "exists": True},
        {"eps_m": 1e-3, "z1": 0.0, "z2": 0.0, "branch_norm": 0.0, "residual": 0.0,
         "sigma": -1, "A": 10 / 9, "B": -52 / 15, "exists": False},
    ]


def test_header_is_written_once(tmp_path):
    # Arrange
    path = tmp_path / "reports" / "bifurcation.csv"
    rows = _bifurcation_rows()

    # Act
    reports.append_rows(path, rows[:1], reports.BIFURCATION_COLUMNS)
    reports.append_rows(path, rows[1:], reports.BIFURCATION_COLUMNS)

    # Assert
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(reports.BIFURCATION_COLUMNS)
    assert len(lines) == 3
    assert sum(line.startswith("eps_m") for line in lines) == 1


def test_floats_keep_full_precision(tmp_path):
    # Arrange
    path = tmp_path / "bifurcation.csv"

    # Act
    reports.append_rows(path, _bifurcation_rows(), reports.BIFURCATION_COLUMNS)
    frame = reports.read_report(path, reports.BIFURCATION_COLUMNS)

    # Assert
    assert frame["A"].iloc[0] == 10 / 9
    assert frame["B"].iloc[1] == -52 / 15


def test_empty_report_gives_an_empty_frame(tmp_path):
    # Arrange
    path = tmp_path / "empty.csv"
    path.write_text("")

    # Act
    frame = reports.read_report(path, reports.MEASURE_COLUMNS)

    # Assert
    assert frame.empty
    assert list(frame.columns) == reports.MEASURE_COLUMNS


def test_missing_columns_are_reported(tmp_path):
    # Arrange
    path = tmp_path / "bad.csv"
    path.write_text("eps_m,z1\n0.1,0.2\n")

    # Act + Assert
    with pytest.raises(errors.MalformedReportError):
        reports.read_report(path, ["eps_m", "branch_norm", "sigma"])


def test_summary_is_sorted_json(tmp_path):
    # Arrange
    path = tmp_path / "summary.json"

    # Act
    reports.write_summary(
        path,
        {"seed": 0, "out_dir": tmp_path},
        {"slope": np.float64(2.0), "kappa": math.inf, "modes": [(1, 1)]},
    )

    # Assert
    text = path.read_text()
    payload = json.loads(text)
    assert payload["results"] == {"kappa": "inf", "modes": [[1, 1]], "slope": 2.0}
    assert payload["config"]["out_dir"] == str(tmp_path)
    assert text.index('"kappa"') < text.index('"modes"') < text.index('"slope"')


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ([1.0, 2.0, 4.0], [3.0, 12.0, 48.0], 2.0),
        ([0.1, 0.01], [0.1, 0.01], 1.0),
    ],
)
def test_loglog_slope(x, y, expected):
    # Arrange + Act + Assert
    assert reports.fit_loglog_slope(x, y) == pytest.approx(expected)


def test_loglog_slope_needs_positive_data():
    # Arrange + Act + Assert
    assert math.isnan(reports.fit_loglog_slope([1.0, 2.0], [0.0, 1.0]))


def test_bifurcation_diagram_is_reproducible(tmp_path):
    # Arrange
    csv_in = tmp_path / "bifurcation.csv"
    reports.append_rows(csv_in, _bifurcation_rows(), reports.BIFURCATION_COLUMNS)
    first, second = tmp_path / "a.svg", tmp_path / "plots" / "b.svg"

    # Act
    plotting.emit_bifurcation_diagram(csv_in, first)
    plotting.emit_bifurcation_diagram(csv_in, second)

    # Assert
    text = first.read_text()
    assert text.startswith("<?xml")
    assert "<dc:date>" not in text
    assert second.read_text() == text


def test_bifurcation_diagram_rejects_other_reports(tmp_path):
    # Arrange
    csv_in = tmp_path / "measure.csv"
    reports.append_rows(csv_in, [{"delta": 0.1}], reports.MEASURE_COLUMNS)

    # Act + Assert
    with pytest.raises(errors.MalformedReportError):
        plotting.emit_bifurcation_diagram(csv_in, tmp_path / "out.svg")


def test_empty_csv_gives_empty_axes(tmp_path):
    # Arrange
    csv_in = tmp_path / "bifurcation.csv"
    csv_in.write_text("")

    # Act
    plotting.emit_bifurcation_diagram(csv_in, tmp_path / "empty.svg")

    # Assert
    assert (tmp_path / "empty.svg").read_text().startswith("<?xml")
