import numpy as np
import pytest

from spectral_torus import errors
from spectral_torus.spectral import expressions


@pytest.mark.parametrize(
    "expression, expected_order, expected_degree",
    [
        ("u**2", 0, 2),
        ("u**2 + cos(x)", 0, 2),
        ("u_x*u + sin(theta)", 1, 2),
        ("u_xx + u**3", 2, 3),
        ("exp(u)", 0, None),
        ("3.5", 0, 0),
    ],
)
def test_expression_order_and_degree(expression, expected_order, expected_degree):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression=expression)

    # Act + Assert
    assert f.order == expected_order
    assert f.degree == expected_degree


@pytest.mark.parametrize("expression", ["log(u)", "u**(-1)", "sqrt(u)", "u**0.5"])
def test_unsupported_primitives_are_rejected(expression):
    # Arrange + Act + Assert
    with pytest.raises(errors.UnsupportedPrimitiveError):
        expressions.ScalarFunctionSpec(expression=expression)


def test_unknown_variable_is_rejected():
    # Arrange + Act + Assert
    with pytest.raises(errors.UnknownVariableError):
        expressions.ScalarFunctionSpec(expression="v**2 + u")


def test_aliases_map_to_canonical_names():
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u_x*cos(x) + u_x2x1")

    # Act
    names = [state.name for state in f.state_variables]

    # Assert
    assert names == ["u_x1", "u_x1x2"]
    assert f.spatial_axes_used == 2
    assert f.depends_on_position


def test_derivative_is_exact():
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u**3 + u*sin(x)")
    u = np.array([0.0, 0.5, -1.0])
    x = np.array([0.1, 0.2, 0.3])

    # Act
    slope = f.derivative("u").evaluate({"u": u, "x1": x})

    # Assert
    np.testing.assert_allclose(slope.real, 3.0 * u**2 + np.sin(x), rtol=0.0, atol=1e-15)


def test_evaluate_broadcasts_constants():
    # Arrange
    f = expressions.constant(2.0)

    # Act
    values = f.evaluate({"u": np.zeros((2, 3))})

    # Assert
    assert values.shape == (2, 3)
    assert np.all(values == 2.0)


def test_evaluate_reports_missing_variables():
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="u + x")

    # Act + Assert
    with pytest.raises(errors.UnknownVariableError):
        f.evaluate({"u": np.zeros(3)})


@pytest.mark.parametrize("expression", ["cos(x)/pi", "u**2 + 2**x", "u*2**(1/2)"])
def test_powers_of_constants_are_accepted(expression):
    # Arrange + Act
    f = expressions.ScalarFunctionSpec(expression=expression)

    # Assert
    assert f.sympy_expr is not None


def test_division_by_a_constant_evaluates():
    # Arrange
    f = expressions.ScalarFunctionSpec(expression="cos(x)/pi")
    x = np.array([0.0, 1.0])

    # Act
    values = f.evaluate({"x1": x})

    # Assert
    np.testing.assert_allclose(values.real, np.cos(x) / np.pi, rtol=1e-15)


@pytest.mark.parametrize(
    "expression, expected",
    [
        ("u**2", 0),
        ("u**2 + cos(x)", 1),
        ("cos(x)**2*u", 2),
        ("cos(theta)*cos(2*x)", 3),
        ("sin(x1 - x2)*u", 2),
        ("exp(cos(x))*u", None),
        ("x*u", None),
        ("cos(x/2)", None),
    ],
)
def test_position_bandwidth(expression, expected):
    # Arrange
    f = expressions.ScalarFunctionSpec(expression=expression)

    # Act + Assert
    assert f.position_bandwidth == expected
