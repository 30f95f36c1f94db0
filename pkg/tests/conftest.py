import math

import pytest

from spectral_torus import models
from spectral_torus.solvers import bifurcation
from spectral_torus.spectral import expressions
from tests.manifold.fixtures import *  # noqa


@pytest.fixture()
def nonresonant_spec():
    # Upsilon_k = -k^2 + 0.5 never vanishes
    yield models.EllipticOperatorSpec(nu=(1.0,), m=0.5)


@pytest.fixture()
def forcing_only():
    yield expressions.ScalarFunctionSpec(expression="cos(x)")


@pytest.fixture()
def solve_config():
    yield models.SolveConfig(
        epsilon=0.01,
        ball_radius=0.5,
        tol=1e-13,
        max_iter=200,
        space=models.SpaceParams(rho=0.0, r=4.0),
        cutoff=8,
        lip_samples=8,
        seed=0,
    )


@pytest.fixture()
def basis_2d():
    """Kernel {(+-1, +-1)} of nu = (1, sqrt 2), m0 = 3."""
    yield bifurcation.kernel_basis((1.0, math.sqrt(2.0)), 3.0, kmax=8)


@pytest.fixture()
def basis_1d():
    yield bifurcation.kernel_basis((1.0,), 1.0, kmax=8)
