from spectral_torus import errors
from spectral_torus.config.config import Config
from spectral_torus.config.config import ExperimentConfig
from spectral_torus.harness import runner
from spectral_torus.manifold import center_manifold
from spectral_torus.models import models
from spectral_torus.models import validation
from spectral_torus.operators import linear_ops
from spectral_torus.solvers import bifurcation
from spectral_torus.solvers import elliptic_solver

__all__ = [
    Config,
    ExperimentConfig,
    errors,
    models,
    validation,
    linear_ops,
    elliptic_solver,
    bifurcation,
    center_manifold,
    runner,
]
