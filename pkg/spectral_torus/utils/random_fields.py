import numpy as np

from spectral_torus.models import models
from spectral_torus.spectral import space as spectral_space


def random_field(
    rng: np.random.Generator,
    dim: int,
    cutoff: int,
    space: models.SpaceParams,
    target_norm: float | None = None,
    freq_dim: int = 0,
    decay_margin: float = 1.0,
) -> models.SpectralField:
    """Real random field whose coefficients decay so that its norm in `space` stays
    bounded as the cutoff grows; optionally rescaled to a given norm."""
    template = models.SpectralField.zeros(dim, cutoff, freq_dim=freq_dim)
    n_axes = dim + freq_dim
    shape = template.coeffs.shape
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weights = spectral_space.weights(template, space)
    lengths = sum(np.abs(axis) for axis in template.axis_wavenumbers())
    decay = 1.0 / np.sqrt(weights) / (1.0 + lengths) ** (n_axes / 2 + decay_margin)
    field = template.with_coeffs(noise * decay).realified()
    if target_norm is not None:
        current = spectral_space.norm(field, space)
        if current > 0.0:
            field = field * (target_norm / current)
    if freq_dim:
        return models.EvolutionField(
            dim=dim, cutoff=cutoff, coeffs=field.coeffs, freq_dim=freq_dim
        )
    return field


def random_ball_point(
    rng: np.random.Generator,
    dim: int,
    cutoff: int,
    space: models.SpaceParams,
    radius: float,
    freq_dim: int = 0,
) -> models.SpectralField:
    """Random field with norm uniformly distributed in [0, radius]."""
    return random_field(
        rng, dim, cutoff, space, target_norm=radius * rng.uniform(), freq_dim=freq_dim
    )
