import math

import pytest

from spectral_torus import errors
from spectral_torus import models
from spectral_torus.solvers import elliptic_solver
from spectral_torus.spectral import expressions
from spectral_torus.spectral import space as spectral_space


@pytest.fixture()
def h1_spec():
    yield models.EvolutionOperatorSpec(nu=(1.0,), m=-1.0, omega=(1.5,))


@pytest.fixture()
def evolution_config(solve_config):
    yield solve_config.model_copy(update={"cutoff": 4, "lip_samples": 4})


def test_forcing_only_has_the_closed_form_solution(nonresonant_spec, forcing_only, solve_config):
    # Arrange + Act
    result = elliptic_solver.solve_elliptic(nonresonant_spec, forcing_only, solve_config)

    # Assert
    # Upsilon_1 = -1/2 and cos x has the coefficient 1/2 at k = +-1
    assert result.solution.coefficient((1,)) == pytest.approx(-solve_config.epsilon, abs=1e-15)
    assert result.solution.coefficient((0,)) == pytest.approx(0.0, abs=1e-15)
    assert result.iterations == 2
    assert elliptic_solver.strong_form_residual(
        nonresonant_spec, forcing_only, result.solution, solve_config.epsilon
    ) == pytest.approx(0.0, abs=1e-14)


def test_quadratic_nonlinearity_converges(nonresonant_spec, solve_config):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u**2 + cos(x)")

    # Act
    result = elliptic_solver.solve_elliptic(nonresonant_spec, f, solve_config)

    # Assert
    assert result.residual < 1e-10
    assert not result.outside_certified_regime
    assert 0.0 < result.contraction_estimate < 0.5
    assert solve_config.epsilon < result.epsilon_star


def test_first_order_response_is_the_linear_solution(nonresonant_spec, forcing_only, solve_config):
    # Arrange
    result = elliptic_solver.solve_elliptic(nonresonant_spec, forcing_only, solve_config)

    # Act
    response = elliptic_solver.first_order_response(nonresonant_spec, forcing_only, solve_config.cutoff)

    # Assert
    assert response.coefficient((1,)) == pytest.approx(
        result.solution.coefficient((1,)) / solve_config.epsilon, abs=1e-12
    )


def test_uniqueness_probe_returns_to_the_same_solution(nonresonant_spec, solve_config):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u**2 + cos(x)")
    result = elliptic_solver.solve_elliptic(nonresonant_spec, f, solve_config)

    # Act
    spread = elliptic_solver.probe_uniqueness(nonresonant_spec, f, solve_config, result.solution, starts=2)

    # Assert
    assert spread < 1e-9


def test_resonant_operator_is_routed_away(forcing_only, solve_config):
    # Arrange
    spec = models.EllipticOperatorSpec(nu=(1.0,), m=1.0)

    # Act + Assert
    with pytest.raises(errors.ResonantSpecError):
        elliptic_solver.solve_elliptic(spec, forcing_only, solve_config)


def test_low_regularity_is_rejected(nonresonant_spec, forcing_only, solve_config):
    # Arrange
    cfg = solve_config.model_copy(update={"space": models.SpaceParams(rho=0.0, r=2.0)})

    # Act + Assert
    with pytest.raises(errors.SpaceParamsError):
        elliptic_solver.solve_elliptic(nonresonant_spec, forcing_only, cfg)


def test_evolution_response_solution(h1_spec, evolution_config):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u**2 + cos(theta)*cos(x)")

    # Act
    result = elliptic_solver.solve_evolution(h1_spec, f, evolution_config)

    # Assert
    assert isinstance(result.solution, models.EvolutionField)
    assert result.solution.freq_dim == 1
    assert result.residual < 1e-10
    # leading order eps f_{1,1} / Upsilon_{1,1} with Upsilon_{1,1} = -2.25 - 1 - 1
    assert result.solution.coefficient((1, 1)).real == pytest.approx(
        evolution_config.epsilon * 0.25 / -4.25, rel=1e-2
    )


def test_solve_elliptic_dispatches_evolution_specs(h1_spec, evolution_config, mocker):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="cos(theta)*cos(x)")
    spy = mocker.spy(elliptic_solver, "solve_evolution")

    # Act
    elliptic_solver.solve_elliptic(h1_spec, f, evolution_config)

    # Assert
    spy.assert_called_once()


def test_dense_frequencies_need_the_center_manifold(forcing_only, evolution_config):
    # Arrange
    spec = models.EvolutionOperatorSpec(nu=(1.0,), m=0.5, omega=(1.0, math.sqrt(2.0)))
    cfg = evolution_config.model_copy(update={"cutoff": 2})

    # Act + Assert
    with pytest.raises(errors.EvolutionCenterRouteError):
        elliptic_solver.solve_evolution(spec, forcing_only, cfg)


@pytest.fixture()
def quadratic_forcing():
    yield (
        models.EllipticOperatorSpec(nu=(1.3,), m=1.0),
        expressions.ScalarFunctionSpec(expression="u**2 + cos(x)"),
    )


def test_picard_contracts_by_half_below_the_threshold(quadratic_forcing):
    # Arrange
    spec, f = quadratic_forcing
    cfg = models.SolveConfig(epsilon=0.01, cutoff=32)

    # Act
    result = elliptic_solver.solve_elliptic(spec, f, cfg)

    # Assert
    assert cfg.epsilon <= result.epsilon_star
    assert not result.outside_certified_regime
    assert result.contraction_estimate <= 0.5
    assert result.residual < 1e-10


def test_solution_does_not_change_when_the_cutoff_doubles(quadratic_forcing):
    # Arrange
    spec, f = quadratic_forcing
    coarse_cfg = models.SolveConfig(epsilon=0.01, cutoff=32, lip_samples=8)
    fine_cfg = coarse_cfg.model_copy(update={"cutoff": 64})

    # Act
    coarse = elliptic_solver.solve_elliptic(spec, f, coarse_cfg)
    fine = elliptic_solver.solve_elliptic(spec, f, fine_cfg)

    # Assert
    gap = fine.solution.with_cutoff(32) - coarse.solution
    assert spectral_space.norm(gap, coarse_cfg.space) < 1e-10
