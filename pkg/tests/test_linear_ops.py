import math

import numpy as np
import pytest

from spectral_torus import errors
from spectral_torus import models
from spectral_torus.harness import reports
from spectral_torus.operators import linear_ops


def test_eigenvalue_formula():
    # Arrange
    spec = models.EllipticOperatorSpec(nu=(1.0, math.sqrt(2.0)), m=3.0)

    # Act + Assert
    assert linear_ops.eigenvalue((1, 1), spec) == pytest.approx(0.0, abs=1e-14)
    assert linear_ops.eigenvalue((2, 0), spec) == pytest.approx(-1.0)
    assert linear_ops.eigenvalue((0, 0), spec) == 3.0


def test_evolution_eigenvalue_formula():
    # Arrange
    spec = models.EvolutionOperatorSpec(nu=(1.0,), m=-1.0, omega=(1.5,))

    # Act
    value = linear_ops.evolution_eigenvalue((2,), (1,), spec)

    # Assert
    assert value == pytest.approx(-9.0 - 1.0 - 1.0)


def test_nu_outside_the_unit_range_is_rejected():
    # Arrange + Act + Assert
    with pytest.raises(errors.ParameterNumberRangeError):
        models.EllipticOperatorSpec(nu=(0.5,), m=1.0)


def test_apply_and_inverse_are_consistent(nonresonant_spec):
    # Arrange
    u = models.SpectralField.from_modes(1, 4, {(0,): 1.0, (3,): 0.5, (-3,): 0.5})

    # Act
    roundtrip = linear_ops.apply_inverse(nonresonant_spec, linear_ops.apply(nonresonant_spec, u))

    # Assert
    np.testing.assert_allclose(roundtrip.coeffs, u.coeffs, atol=1e-15)


def test_inverse_refuses_kernel_modes():
    # Arrange
    spec = models.EllipticOperatorSpec(nu=(1.0,), m=4.0)
    u = models.SpectralField.from_modes(1, 3, {(2,): 1.0, (-2,): 1.0})

    # Act + Assert
    with pytest.raises(errors.SingularMultiplierError):
        linear_ops.apply_inverse(spec, u)
    projected = linear_ops.apply_inverse(spec, u, exclude_kernel=True)
    assert not projected.coeffs.any()


def test_operator_norm_bounds(nonresonant_spec):
    # Arrange + Act
    upper = linear_ops.operator_norm_bound(nonresonant_spec, 2)
    inverse = linear_ops.inverse_norm_bound(nonresonant_spec, 2)

    # Assert
    assert upper == pytest.approx(3.5)
    assert inverse == pytest.approx(2.0)


def test_resonance_scan_finds_the_kernel_orbit():
    # Arrange
    spec = models.EllipticOperatorSpec(nu=(1.0, math.sqrt(2.0)), m=3.0)

    # Act
    report = linear_ops.resonance_scan(spec, delta=0.0, kmax=6)

    # Assert
    assert report.classification == models.ResonanceClassification.RESONANT
    assert report.kernel_modes == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    assert report.margin == pytest.approx(1.0)


def test_resonance_scan_of_a_nonresonant_operator(nonresonant_spec):
    # Arrange + Act
    report = linear_ops.resonance_scan(nonresonant_spec, delta=0.1, kmax=8)

    # Assert
    assert report.classification == models.ResonanceClassification.NONRESONANT
    assert report.kernel_modes == []
    assert report.margin == pytest.approx(0.5)
    assert "classification = nonresonant" in report.to_text()


def test_delta_widens_the_kernel(nonresonant_spec):
    # Arrange + Act
    report = linear_ops.resonance_scan(nonresonant_spec, delta=0.5, kmax=8)

    # Assert
    assert set(report.kernel_modes) == {(0,), (1,), (-1,)}


@pytest.mark.parametrize(
    "spec, expected",
    [
        (
            models.EvolutionOperatorSpec(nu=(1.0,), m=-1.0, omega=(1.5,)),
            models.ResonanceClassification.EVOLUTION_H1,
        ),
        (
            models.EvolutionOperatorSpec(nu=(1.0,), m=0.5, omega=(math.sqrt(2.0),)),
            models.ResonanceClassification.EVOLUTION_H2,
        ),
        (
            models.EvolutionOperatorSpec(nu=(1.0,), m=2.0, omega=(1.0,)),
            models.ResonanceClassification.RESONANT,
        ),
        (
            models.EvolutionOperatorSpec(nu=(1.0,), m=0.5, omega=(1.0, math.sqrt(2.0))),
            models.ResonanceClassification.EVOLUTION_CENTER,
        ),
    ],
)
def test_evolution_classification(spec, expected):
    # Arrange + Act
    report = linear_ops.resonance_scan(spec, delta=0.0, kmax=6)

    # Assert
    assert report.classification == expected


def test_negative_delta_is_rejected(nonresonant_spec):
    # Arrange + Act + Assert
    with pytest.raises(errors.ParameterNumberRangeError):
        linear_ops.resonance_scan(nonresonant_spec, delta=-1.0)


def test_measure_estimate_respects_the_analytic_bound():
    # Arrange + Act
    estimate = linear_ops.excluded_measure_estimate(2, 5.0, 0.05, samples=20_000, seed=1)

    # Assert
    assert 0.0 < estimate.monte_carlo <= estimate.analytic_bound + 3.0 * estimate.stderr
    assert estimate.samples == 20_000


def test_measure_estimate_is_seeded():
    # Arrange + Act
    first = linear_ops.excluded_measure_estimate(2, 5.0, 0.05, samples=5_000, seed=7)
    second = linear_ops.excluded_measure_estimate(2, 5.0, 0.05, samples=5_000, seed=7)

    # Assert
    assert first == second


@pytest.mark.parametrize("dim", [1, 2])
def test_excluded_measure_is_linear_in_delta(dim):
    # Arrange
    deltas = [1e-1, 3e-2, 1e-2]

    # Act
    estimates = [
        linear_ops.excluded_measure_estimate(dim, 5.0, delta, samples=100_000, seed=0)
        for delta in deltas
    ]

    # Assert
    slope = reports.fit_loglog_slope(deltas, [e.monte_carlo for e in estimates])
    assert 0.9 <= slope <= 1.1
    assert all(e.monte_carlo <= e.analytic_bound + 3.0 * e.stderr for e in estimates)
