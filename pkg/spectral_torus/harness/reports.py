"""Append-only CSV reports and the per-run summary.

CSV floats are written with 17 significant digits and no timestamps, so a rerun
with the same config and seed reproduces the files byte for byte.
"""

import json
import pathlib
import typing

import numpy as np
import pandas as pd

from spectral_torus import errors
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

FLOAT_FORMAT = "%.17g"

BIFURCATION_COLUMNS = ["eps_m", "z1", "z2", "branch_norm", "residual", "sigma", "A", "B", "exists"]
SOLVE_COLUMNS = [
    "dim",
    "nu",
    "m",
    "omega",
    "f",
    "epsilon",
    "radius",
    "rho",
    "r",
    "cutoff",
    "seed",
    "iterations",
    "residual",
    "contraction",
    "epsilon_star",
    "outside_certified_regime",
    "uniqueness_spread",
]
MEASURE_COLUMNS = ["delta", "analytic_bound", "mc_estimate", "mc_stderr", "seed"]
INVARIANCE_COLUMNS = ["radius", "residual", "samples", "seed", "step"]


def append_rows(
    path: pathlib.Path, rows: list[dict[str, typing.Any]], columns: list[str]
) -> pd.DataFrame:
    """Appends rows to a CSV, writing the header only when the file is new or empty."""
    frame = pd.DataFrame(rows, columns=columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not path.exists() or path.stat().st_size == 0
    frame.to_csv(path, mode="a", header=new_file, index=False, float_format=FLOAT_FORMAT)
    log.debug(f"appended {len(frame)} row(s) to {path}")
    return frame


def read_report(path: pathlib.Path, required_columns: list[str]) -> pd.DataFrame:
    """Reads a CSV report; an empty file gives an empty frame with the required columns.

    Raises:
        MalformedReportError: a required column is missing.
    """
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=required_columns)
    missing = [column for column in required_columns if column not in frame.columns]
    if missing:
        raise errors.MalformedReportError(str(path), missing)
    return frame


def write_text(path: pathlib.Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _jsonable(value: typing.Any) -> typing.Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, pathlib.Path):
        return str(value)
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_summary(
    path: pathlib.Path, experiment: dict[str, typing.Any], results: dict[str, typing.Any]
) -> None:
    """Writes the resolved config and the results as sorted JSON."""
    payload = {"config": _jsonable(experiment), "results": _jsonable(results)}
    write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def fit_loglog_slope(x: typing.Sequence[float], y: typing.Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0.0) or np.any(y <= 0.0):
        return float("nan")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
