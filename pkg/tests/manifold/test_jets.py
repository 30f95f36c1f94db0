import numpy as np
import pytest

from spectral_torus.manifold import jets
from spectral_torus.spectral import expressions


@pytest.fixture()
def state():
    rng = np.random.default_rng(5)
    c2 = rng.standard_normal((4, 2, 2))
    yield jets.Jet(
        rng.standard_normal(4).astype(np.complex128),
        rng.standard_normal((4, 2)).astype(np.complex128),
        (0.5 * (c2 + np.swapaxes(c2, -1, -2))).astype(np.complex128),
    )


def _value(jet: jets.Jet, z: np.ndarray) -> np.ndarray:
    return jet.c0 + jet.c1 @ z + np.einsum("...ab,a,b->...", jet.c2, z, z)


def test_square_through_compose_equals_multiply(state):
    # Arrange
    square = expressions.ScalarFunctionSpec(expression="u**2")

    # Act
    composed = jets.compose(square, {"u": state}, {}, state.n)
    product = jets.multiply(state, state)

    # Assert
    for expected, found in zip(product, composed):
        np.testing.assert_allclose(found, expected, atol=1e-14)


def test_product_truncates_at_second_order(state):
    # Arrange
    z = np.array([1e-5, -2e-5])

    # Act
    product = jets.multiply(state, state)

    # Assert
    np.testing.assert_allclose(_value(product, z), _value(state, z) ** 2, rtol=1e-9)


def test_transport_along_a_constant_field(state):
    # Arrange
    w = jets.Jet(state.c0[:, None], state.c1[:, None, :], state.c2[:, None, :, :])
    g = jets.constant(np.tile([[0.5, -1.0]], (4, 1)), 2)

    # Act
    moved = jets.transport(w, g)

    # Assert
    direction = np.array([0.5, -1.0])
    np.testing.assert_allclose(moved.c0[:, 0], state.c1 @ direction)
    np.testing.assert_allclose(moved.c1[:, 0], 2.0 * state.c2 @ direction)
    assert not moved.c2.any()


def test_synthesize_places_single_modes():
    # Arrange
    coeffs = np.zeros(5)
    coeffs[3] = 1.0

    # Act
    values = jets.synthesize(coeffs, cutoff=2, n=8, axes=(0,))

    # Assert
    x = 2.0 * np.pi * np.arange(8) / 8
    np.testing.assert_allclose(values, np.exp(1j * x), atol=1e-14)


def test_analyze_inverts_synthesize():
    # Arrange
    rng = np.random.default_rng(2)
    coeffs = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))

    # Act
    recovered = jets.analyze(jets.synthesize(coeffs, 2, 6, axes=(0,)), 2, axes=(0,))

    # Assert
    np.testing.assert_allclose(recovered, coeffs, atol=1e-14)
