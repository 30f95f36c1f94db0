import math

import numpy as np
import pytest
import scipy.fft
import scipy.special

from spectral_torus import errors
from spectral_torus import models
from spectral_torus.harness import reports
from spectral_torus.spectral import expressions
from spectral_torus.spectral import space as spectral_space
from spectral_torus.utils import random_fields


def _cosine(cutoff: int = 4, amplitude: float = 1.0) -> models.SpectralField:
    return models.SpectralField.from_modes(
        1, cutoff, {(1,): 0.5 * amplitude, (-1,): 0.5 * amplitude}
    )


@pytest.mark.parametrize(
    "rho, r, expected",
    [
        (0.0, 0.0, math.sqrt(0.5)),
        (0.0, 2.0, math.sqrt(0.5) * 2.0),
        (0.5, 0.0, math.sqrt(0.5) * math.exp(0.5)),
    ],
)
def test_norm_uses_analytic_and_sobolev_weights(rho, r, expected):
    # Arrange
    u = _cosine()

    # Act
    value = spectral_space.norm(u, models.SpaceParams(rho=rho, r=r))

    # Assert
    assert value == pytest.approx(expected, rel=1e-14)


def test_multiply_squares_a_cosine():
    # Arrange
    u = _cosine()

    # Act
    product = spectral_space.multiply(u, u)

    # Assert
    assert product.coefficient((0,)) == pytest.approx(0.5, abs=1e-15)
    assert product.coefficient((2,)) == pytest.approx(0.25, abs=1e-15)
    assert product.coefficient((-2,)) == pytest.approx(0.25, abs=1e-15)
    assert product.coefficient((1,)) == pytest.approx(0.0, abs=1e-15)


def test_multiply_truncates_unless_widened():
    # Arrange
    u = _cosine(cutoff=1)

    # Act
    truncated = spectral_space.multiply(u, u)
    widened = spectral_space.multiply(u, u, widen=True)

    # Assert
    assert truncated.cutoff == 1
    assert truncated.coefficient((2,)) == 0
    assert widened.cutoff == 2
    assert widened.coefficient((2,)) == pytest.approx(0.25, abs=1e-15)


def test_derivative_multiplies_by_ik():
    # Arrange
    u = _cosine()

    # Act
    du = spectral_space.derivative(u, axis=1)
    d2u = spectral_space.derivative(u, axis=1, order=2)

    # Assert
    assert du.coefficient((1,)) == pytest.approx(0.5j)
    assert du.coefficient((-1,)) == pytest.approx(-0.5j)
    assert d2u.coefficient((1,)) == pytest.approx(-0.5)


def test_translate_by_pi_flips_a_cosine():
    # Arrange
    u = _cosine()

    # Act
    shifted = spectral_space.translate(u, [math.pi])

    # Assert
    np.testing.assert_allclose(shifted.coeffs, -u.coeffs, atol=1e-15)


def test_apply_nonlinearity_matches_the_convolution():
    # Arrange
    u = _cosine()
    f = expressions.ScalarFunctionSpec(expression="u**2")

    # Act
    collocated = spectral_space.apply_nonlinearity(f, u)
    convolved = spectral_space.multiply(u, u)

    # Assert
    np.testing.assert_allclose(collocated.coeffs, convolved.coeffs, atol=1e-14)


def test_apply_nonlinearity_uses_derivatives():
    # Arrange
    u = _cosine()
    f = expressions.ScalarFunctionSpec(expression="u_x")

    # Act
    result = spectral_space.apply_nonlinearity(f, u)

    # Assert
    np.testing.assert_allclose(
        result.coeffs, spectral_space.derivative(u, 1).coeffs, atol=1e-14
    )


def test_apply_nonlinearity_refuses_disallowed_derivative_orders():
    # Arrange
    u = _cosine()
    f = expressions.ScalarFunctionSpec(expression="u_xx")

    # Act + Assert
    with pytest.raises(errors.UnknownVariableError):
        spectral_space.apply_nonlinearity(f, u, derivs=(1,))


def test_apply_derivative_of_square():
    # Arrange
    u = _cosine()
    v = models.SpectralField.from_modes(1, 4, {(0,): 1.0})
    f = expressions.ScalarFunctionSpec(expression="u**2")

    # Act
    derivative = spectral_space.apply_derivative(f, u, v)

    # Assert
    np.testing.assert_allclose(derivative.coeffs, (2.0 * u).coeffs, atol=1e-14)


def test_domain_ball_is_enforced():
    # Arrange
    u = _cosine(amplitude=2.0)
    f = expressions.ScalarFunctionSpec(expression="u**2", domain_radius=0.5)

    # Act + Assert
    with pytest.raises(errors.DomainBallError):
        spectral_space.apply_nonlinearity(f, u)


def test_sup_bound_needs_the_algebra_property():
    # Arrange
    u = _cosine()

    # Act
    bound = spectral_space.sup_bound(u, models.SpaceParams(rho=0.0, r=1.0))

    # Assert
    assert bound.bound == pytest.approx(1.0)
    with pytest.raises(errors.SpaceParamsError):
        spectral_space.sup_bound(u, models.SpaceParams(rho=0.0, r=0.5))


def test_fields_of_different_cutoffs_do_not_add():
    # Arrange + Act + Assert
    with pytest.raises(errors.DimensionMismatchError):
        _cosine(cutoff=2) + _cosine(cutoff=3)


def _random_pair(seed: int, dim: int, cutoff: int, space: models.SpaceParams):
    rng = np.random.default_rng(seed)
    u = random_fields.random_field(rng, dim, cutoff, space, target_norm=0.5)
    v = random_fields.random_field(rng, dim, cutoff, space, target_norm=1.0)
    return u, v


def test_derivative_remainder_is_quadratic_for_sine():
    # Arrange
    space = models.SpaceParams(rho=0.0, r=1.1)
    u, v = _random_pair(3, 1, 16, space)
    f = expressions.ScalarFunctionSpec(expression="sin(u)")
    steps = [1e-2, 5e-3, 2.5e-3]
    linear = spectral_space.apply_derivative(f, u, v)
    base = spectral_space.apply_nonlinearity(f, u)

    # Act
    remainders = [
        spectral_space.norm(
            spectral_space.apply_nonlinearity(f, u + h * v) - base - h * linear, space
        )
        for h in steps
    ]

    # Assert
    assert 1.9 <= reports.fit_loglog_slope(steps, remainders) <= 2.1


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("rho", [0.0, 0.2])
def test_product_constant_is_stable_under_refinement(dim, rho):
    # Arrange
    space = models.SpaceParams(rho=rho, r=dim / 2 + 0.6)
    rng = np.random.default_rng(11)
    pairs = [
        (
            random_fields.random_field(rng, dim, 32, space),
            random_fields.random_field(rng, dim, 32, space),
        )
        for _ in range(20)
    ]

    def largest_ratio(cutoff: int) -> float:
        ratios = []
        for u, v in pairs:
            u, v = u.with_cutoff(cutoff), v.with_cutoff(cutoff)
            product = spectral_space.multiply(u, v)
            ratios.append(
                spectral_space.norm(product, space)
                / (spectral_space.norm(u, space) * spectral_space.norm(v, space))
            )
        return max(ratios)

    # Act
    coarse, fine = largest_ratio(16), largest_ratio(32)

    # Assert
    assert 0.0 < fine <= 1.1 * coarse


@pytest.mark.parametrize("dim, rho", [(1, 0.0), (1, 0.3), (2, 0.1)])
def test_sup_bound_dominates_the_grid_maximum(dim, rho):
    # Arrange
    space = models.SpaceParams(rho=rho, r=dim / 2 + 0.6)
    u = random_fields.random_field(np.random.default_rng(5), dim, 12, space)

    # Act
    bound = spectral_space.sup_bound(u, space)

    # Assert
    grid_max = np.max(np.abs(spectral_space.to_grid(u, 64)))
    assert grid_max <= bound.bound * (1.0 + 1e-12)
    assert bound.bound <= bound.sobolev_constant * spectral_space.norm(u, space) * (1.0 + 1e-12)


def test_real_fields_stay_real_through_products_and_nonlinearities():
    # Arrange
    space = models.SpaceParams(rho=0.0, r=1.1)
    u, v = _random_pair(7, 1, 10, space)
    f = expressions.ScalarFunctionSpec(expression="sin(u) + cos(x)*u**2 + u_x**2")
    n = spectral_space.collocation_size(f, u.cutoff)

    # Act
    grid = spectral_space.nonlinearity_on_grid(f, u, n)
    raw = spectral_space.from_grid(grid, 1, u.cutoff, is_real=False)
    product = spectral_space.multiply(u, v)

    # Assert
    assert np.max(np.abs(grid.imag)) < 1e-12
    assert raw.reality_defect() < 1e-14
    assert product.is_real
    assert np.max(np.abs(spectral_space.to_grid(product, 21).imag)) < 1e-12


@pytest.mark.parametrize("dim", [1, 2])
def test_grid_mean_square_equals_coefficient_norm(dim):
    # Arrange
    u = random_fields.random_field(np.random.default_rng(2), dim, 6, models.SpaceParams(r=1.5))
    plain = models.SpaceParams()

    # Act
    mean_square = float(np.mean(np.abs(spectral_space.to_grid(u, 13)) ** 2))

    # Assert
    assert mean_square == pytest.approx(spectral_space.norm(u, plain) ** 2, rel=1e-12)
    assert spectral_space.inner(u, u).real == pytest.approx(mean_square, rel=1e-12)


def test_position_dependent_exponential_gets_the_wide_grid():
    # Arrange
    cutoff = 8
    f = expressions.ScalarFunctionSpec(expression="exp(cos(x))*u")
    one = models.SpectralField.from_modes(1, cutoff, {(0,): 1.0})

    # Act
    size = spectral_space.collocation_size(f, cutoff)
    result = spectral_space.apply_nonlinearity(f, one)

    # Assert
    assert size == scipy.fft.next_fast_len(4 * (2 * cutoff + 1))
    assert size == spectral_space.collocation_size(
        expressions.ScalarFunctionSpec(expression="exp(u)"), cutoff
    )
    expected = scipy.special.iv(np.arange(-cutoff, cutoff + 1), 1.0)
    np.testing.assert_allclose(result.coeffs, expected, atol=1e-14)
