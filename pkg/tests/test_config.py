import pathlib

import pydantic
import pytest

from spectral_torus.config import config

EXPERIMENT_TOML = """
scenario = "bifurcate"
seed = 3

[operator]
nu = [1.0, 1.4142135623730951]

[bifurcation]
m0 = 3.0
eps_range = "-1e-2:-1e-4:3"

[bifurcation.newton]
cutoff = 16
"""


@pytest.fixture()
def experiment_file(tmp_path) -> pathlib.Path:
    path = tmp_path / "experiment.toml"
    path.write_text(EXPERIMENT_TOML)
    yield path


def test_experiment_file_is_loaded(experiment_file):
    # Arrange + Act
    experiment = config.load_experiment_config(experiment_file)

    # Assert
    assert experiment.scenario == "bifurcate"
    assert experiment.seed == 3
    assert experiment.bifurcation.eps_range == pytest.approx([-1e-2, -1e-3, -1e-4])
    assert experiment.bifurcation.newton.cutoff == 16
    assert experiment.bifurcation.newton.tol == config.NewtonConfig().tol


def test_overrides_win_over_the_file(experiment_file):
    # Arrange
    overrides = {"seed": 11, "bifurcation": {"eps_range": "-1e-3,-2e-3"}}

    # Act
    experiment = config.load_experiment_config(experiment_file, overrides)

    # Assert
    assert experiment.seed == 11
    assert experiment.bifurcation.eps_range == [-1e-3, -2e-3]
    assert experiment.bifurcation.m0 == 3.0
    assert experiment.bifurcation.newton.cutoff == 16


def test_missing_file_is_reported(tmp_path):
    # Arrange + Act + Assert
    with pytest.raises(FileNotFoundError):
        config.load_experiment_config(tmp_path / "absent.toml")


def test_unknown_keys_are_rejected():
    # Arrange + Act + Assert
    with pytest.raises(pydantic.ValidationError):
        config.load_experiment_config(None, {"operator": {"mass": 1.0}})


@pytest.mark.parametrize(
    "start, stop, count, expected",
    [
        (1e-4, 1e-2, 3, [1e-4, 1e-3, 1e-2]),
        (-1.0, -4.0, 3, [-1.0, -2.0, -4.0]),
        (0.5, 0.5, 1, [0.5]),
    ],
)
def test_geometric_grid(start, stop, count, expected):
    # Arrange + Act + Assert
    assert config.geometric_grid(start, stop, count) == pytest.approx(expected)


def test_geometric_grid_needs_equal_signs():
    # Arrange + Act + Assert
    with pytest.raises(ValueError):
        config.geometric_grid(-1.0, 1.0, 3)


def test_runtime_settings_read_the_environment(monkeypatch):
    # Arrange
    monkeypatch.setenv("SPECTRAL_TORUS_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("SPECTRAL_TORUS_QUADRATURE__TAIL_TOL", "1e-10")

    # Act
    settings = config.Config(_env_file=None)

    # Assert
    assert settings.log_level == "DEBUG"
    assert settings.quadrature.tail_tol == 1e-10
    assert settings.quadrature.gauss_order == config.QuadratureConfig().gauss_order
