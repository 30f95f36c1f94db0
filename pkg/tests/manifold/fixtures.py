import typing

import pytest

from spectral_torus.config import config
from spectral_torus.manifold import center_manifold
from spectral_torus.models import models
from spectral_torus.spectral import expressions


@pytest.fixture()
def evolution_spec() -> typing.Generator[models.EvolutionOperatorSpec, None, None]:
    """sigma_k = k^2 - 2: k = 0, +-1 are center modes, |k| >= 2 hyperbolic."""
    yield models.EvolutionOperatorSpec(nu=(1.0,), m=2.0, omega=(1.0,))


@pytest.fixture()
def small_manifold_config() -> typing.Generator[config.ManifoldConfig, None, None]:
    yield config.ManifoldConfig(theta_modes=2, cutoff_radius=2.0, r_smooth=3)


@pytest.fixture()
def forced_system(evolution_spec, small_manifold_config):
    """Forcing without state dependence, living on the hyperbolic modes k = +-2."""
    yield center_manifold.prepare_system(
        evolution_spec,
        expressions.ScalarFunctionSpec(expression="cos(theta)*cos(2*x)"),
        epsilon=0.1,
        cutoff=2,
        manifold=small_manifold_config,
    )


@pytest.fixture()
def quadratic_system(evolution_spec, small_manifold_config):
    yield center_manifold.prepare_system(
        evolution_spec,
        expressions.ScalarFunctionSpec(expression="u**2"),
        epsilon=0.1,
        cutoff=2,
        manifold=small_manifold_config,
    )


@pytest.fixture()
def forced_quadratic_system():
    """u^2 plus a forcing on the center modes, frequency 1.37."""
    yield center_manifold.prepare_system(
        models.EvolutionOperatorSpec(nu=(1.0,), m=2.0, omega=(1.37,)),
        expressions.ScalarFunctionSpec(expression="u**2 + cos(theta)*cos(x)"),
        epsilon=1e-3,
        cutoff=3,
        manifold=config.ManifoldConfig(theta_modes=2),
    )
