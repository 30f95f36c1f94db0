import pytest

from spectral_torus import errors
from spectral_torus.config import config
from spectral_torus.models import validation


def _experiment(**sections) -> config.ExperimentConfig:
    return config.ExperimentConfig.model_validate(sections)


@pytest.mark.parametrize(
    "sections",
    [
        {
            "scenario": "solve",
            "operator": {"nu": [1.0], "m": 0.5},
            "nonlinearity": {"f": "u**2"},
            "solver": {"epsilon": 0.01},
        },
        {"scenario": "scan", "operator": {"nu": [1.0, 1.5], "m": 3.0}},
        {
            "scenario": "bifurcate",
            "operator": {"nu": [1.0, 1.4142135623730951]},
            "bifurcation": {"m0": 3.0, "eps_range": [-0.001]},
        },
        {"scenario": "measure-sweep", "measure": {"dim": 2, "m": 5.0}},
        {"scenario": "plot", "plot": {"csv_in": "a.csv", "svg_out": "a.svg"}},
    ],
)
def test_consistent_experiments_pass(sections):
    # Arrange
    experiment = _experiment(**sections)

    # Act + Assert
    validation.validate_experiment(experiment)


def test_all_violations_are_listed():
    # Arrange
    experiment = _experiment(scenario="evolution", operator={"nu": [1.0, 3.0], "dim": 1})

    # Act
    with pytest.raises(errors.ExperimentValidationError) as exc_info:
        validation.validate_experiment(experiment)

    # Assert
    violations = exc_info.value.violations
    assert any(v.startswith("operator.nu: expected 1 entries") for v in violations)
    assert any(v.startswith("operator.nu: entries must lie in [1, 2]") for v in violations)
    assert "operator.m: missing" in violations
    assert any(v.startswith("operator.omega: missing") for v in violations)
    assert "nonlinearity.f: missing" in violations
    assert "solver.epsilon: missing" in violations
    assert exc_info.value.exit_code == 2


def test_missing_scenario():
    # Arrange + Act
    with pytest.raises(errors.ExperimentValidationError) as exc_info:
        validation.validate_experiment(_experiment())

    # Assert
    assert exc_info.value.violations == ["scenario: missing"]


@pytest.mark.parametrize(
    "omega, r, violated",
    [
        (None, 3.0, True),
        (None, 3.5, False),
        ([1.0, 1.5, 2.0], 3.5, True),
    ],
)
def test_regularity_requirement(omega, r, violated):
    # Arrange
    experiment = _experiment(
        scenario="evolution" if omega else "solve",
        operator={"nu": [1.0, 1.0], "m": 0.5, "omega": omega},
        nonlinearity={"f": "u**2"},
        solver={"epsilon": 0.01},
        space={"r": r},
    )

    # Act
    try:
        validation.validate_experiment(experiment)
        violations = []
    except errors.ExperimentValidationError as exc:
        violations = exc.violations

    # Assert
    assert any(v.startswith("space.r") for v in violations) == violated


def test_bifurcation_needs_low_dimension_and_eps_values():
    # Arrange
    experiment = _experiment(
        scenario="bifurcate", operator={"nu": [1.0, 1.0, 1.0], "m": 3.0}, bifurcation={"phase": [0.0]}
    )

    # Act
    with pytest.raises(errors.ExperimentValidationError) as exc_info:
        validation.validate_experiment(experiment)

    # Assert
    assert exc_info.value.violations == [
        "operator.dim: bifurcation needs d in {1, 2}, found 3",
        "bifurcation.eps_range: missing",
        "bifurcation.phase: expected 3 entries, found 1",
    ]


def test_measure_sweep_needs_positive_deltas():
    # Arrange
    experiment = _experiment(scenario="measure-sweep", measure={"dim": 1, "m": 1.0, "deltas": [0.1, 0.0]})

    # Act + Assert
    with pytest.raises(errors.ExperimentValidationError, match="measure.deltas"):
        validation.validate_experiment(experiment)
