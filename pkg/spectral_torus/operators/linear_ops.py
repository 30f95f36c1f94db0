"""Diagonal multiplier operators on the torus.

L_{nu,m} = sum nu_i^2 d^2/dx_i^2 + m acts on e^{ik.x} by
Upsilon_k = -sum nu_i^2 k_i^2 + m, and its evolution analogue Q_{omega,nu,m}
acts on e^{i(l.theta + k.x)} by Upsilon_{l,k} = -(omega.l)^2 - sum nu_i^2 k_i^2 + m.
"""

import itertools
import typing

import numpy as np

from spectral_torus import errors
from spectral_torus.models import models
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

DEFAULT_RELATIVE_TOLERANCE = 1e-9
_MEASURE_CHUNK = 200_000


def eigenvalue(k: typing.Sequence[int], spec: models.EllipticOperatorSpec) -> float:
    if len(k) != spec.dim:
        raise errors.DimensionMismatchError(expected=spec.dim, found=len(k))
    return -sum(nu_i**2 * k_i**2 for nu_i, k_i in zip(spec.nu, k)) + spec.m


def evolution_eigenvalue(
    l: typing.Sequence[int],
    k: typing.Sequence[int],
    spec: models.EvolutionOperatorSpec,
) -> float:
    if len(l) != spec.freq_dim:
        raise errors.DimensionMismatchError(expected=spec.freq_dim, found=len(l), what="l")
    frequency = sum(omega_j * l_j for omega_j, l_j in zip(spec.omega, l))
    return -(frequency**2) + eigenvalue(k, spec.spatial())


def _box_axes(n_axes: int, cutoff: int) -> list[np.ndarray]:
    line = np.arange(-cutoff, cutoff + 1)
    result = []
    for axis in range(n_axes):
        shape = [1] * n_axes
        shape[axis] = line.size
        result.append(line.reshape(shape))
    return result


def multipliers(spec: models.OperatorSpec, cutoff: int) -> np.ndarray:
    """Upsilon over the truncation box, laid out like SpectralField.coeffs."""
    freq_dim = spec.freq_dim if isinstance(spec, models.EvolutionOperatorSpec) else 0
    axes = _box_axes(freq_dim + spec.dim, cutoff)
    values = np.full((2 * cutoff + 1,) * (freq_dim + spec.dim), spec.m, dtype=float)
    if freq_dim:
        frequency = sum(omega_j * axes[j] for j, omega_j in enumerate(spec.omega))
        values = values - frequency**2
    for i, nu_i in enumerate(spec.nu):
        values = values - nu_i**2 * axes[freq_dim + i] ** 2
    return values


def kernel_tolerance(
    cutoff: int, n_axes: int, delta: float = 0.0, relative: float = DEFAULT_RELATIVE_TOLERANCE
) -> np.ndarray:
    """max(delta, relative (1 + |k|^2)) per mode, |k| the l1 length."""
    lengths = sum(np.abs(axis) for axis in _box_axes(n_axes, cutoff))
    return np.maximum(delta, relative * (1.0 + lengths**2))


def _check_field(spec: models.OperatorSpec, u: models.SpectralField) -> None:
    freq_dim = spec.freq_dim if isinstance(spec, models.EvolutionOperatorSpec) else 0
    if (u.dim, u.freq_dim) != (spec.dim, freq_dim):
        raise errors.DimensionMismatchError(
            expected=(spec.dim, freq_dim), found=(u.dim, u.freq_dim), what="(dim, freq_dim)"
        )


def apply(spec: models.OperatorSpec, u: models.SpectralField) -> models.SpectralField:
    _check_field(spec, u)
    return u.with_coeffs(u.coeffs * multipliers(spec, u.cutoff))


def kernel_mask(
    spec: models.OperatorSpec,
    cutoff: int,
    delta: float = 0.0,
    relative: float = DEFAULT_RELATIVE_TOLERANCE,
) -> np.ndarray:
    values = multipliers(spec, cutoff)
    return np.abs(values) <= kernel_tolerance(cutoff, values.ndim, delta, relative)


def apply_inverse(
    spec: models.OperatorSpec,
    u: models.SpectralField,
    exclude_kernel: bool = False,
    delta: float = 0.0,
    relative: float = DEFAULT_RELATIVE_TOLERANCE,
) -> models.SpectralField:
    """Divides by Upsilon. With exclude_kernel the kernel modes are zeroed,
    which is the inverse of L restricted to the range composed with Pi_R.

    Raises:
        SingularMultiplierError: a multiplier is within tolerance of zero and
            exclude_kernel is False.
    """
    _check_field(spec, u)
    values = multipliers(spec, u.cutoff)
    mask = np.abs(values) <= kernel_tolerance(u.cutoff, values.ndim, delta, relative)
    if mask.any() and not exclude_kernel:
        position = tuple(int(i) for i in np.argwhere(mask)[0])
        mode = tuple(i - u.cutoff for i in position)
        raise errors.SingularMultiplierError(
            mode=mode,
            multiplier=float(values[position]),
            tolerance=float(kernel_tolerance(u.cutoff, values.ndim, delta, relative)[position]),
        )
    safe = np.where(mask, 1.0, values)
    return u.with_coeffs(np.where(mask, 0.0, u.coeffs / safe))


def operator_norm_bound(spec: models.OperatorSpec, cutoff: int) -> float:
    """sup |Upsilon| over the box; ||Au|| <= this * ||u|| in every weighted norm."""
    return float(np.max(np.abs(multipliers(spec, cutoff))))


def inverse_norm_bound(spec: models.OperatorSpec, cutoff: int) -> float:
    """1 / min |Upsilon|, the norm of the inverse in every fixed weighted norm."""
    return float(1.0 / np.min(np.abs(multipliers(spec, cutoff))))


def _flip_closure(modes: set[models.WaveVector], freq_dim: int) -> set[models.WaveVector]:
    closed = set(modes)
    for mode in modes:
        l, k = mode[:freq_dim], mode[freq_dim:]
        l_choices = [l, tuple(-lj for lj in l)] if freq_dim else [()]
        for l_choice in l_choices:
            for signs in itertools.product((1, -1), repeat=len(k)):
                closed.add(l_choice + tuple(s * ki for s, ki in zip(signs, k)))
    return closed


def resonance_scan(
    spec: models.OperatorSpec,
    delta: float,
    kmax: int = 64,
    relative: float = DEFAULT_RELATIVE_TOLERANCE,
) -> models.ResonanceReport:
    """Enumerates the box |k_i| <= kmax (and |l_j| <= kmax), returns the kernel,
    the margin min |Upsilon| over the other modes and the classification.

    Evolution specs are classified:
    - evolution-H1 if -sum nu^2 k^2 + m < 0 for every k (then Upsilon_{l,k} <= m < 0)
    - evolution-H2 if b = 1, omega in [1, 2] and no mode is within tolerance
    - resonant if b = 1, omega in [1, 2] and some mode is within tolerance
    - evolution-center otherwise (dense {(omega.l)^2} for b >= 2)
    """
    if delta < 0:
        raise errors.ParameterNumberRangeError("delta", 0.0, np.inf, delta)
    values = multipliers(spec, kmax)
    mask = np.abs(values) <= kernel_tolerance(kmax, values.ndim, delta, relative)
    kernel = {tuple(int(i) - kmax for i in index) for index in np.argwhere(mask)}
    is_evolution = isinstance(spec, models.EvolutionOperatorSpec)
    freq_dim = spec.freq_dim if is_evolution else 0
    kernel = sorted(_flip_closure(kernel, freq_dim), reverse=True)
    remaining = np.abs(values[~mask])
    margin = float(np.min(remaining)) if remaining.size else 0.0

    if not is_evolution:
        classification = (
            models.ResonanceClassification.RESONANT
            if kernel
            else models.ResonanceClassification.NONRESONANT
        )
    else:
        spatial = multipliers(spec.spatial(), kmax)
        if np.max(spatial) < 0:
            classification = models.ResonanceClassification.EVOLUTION_H1
        elif spec.freq_dim == 1 and 1.0 <= spec.omega[0] <= 2.0:
            classification = (
                models.ResonanceClassification.RESONANT
                if kernel
                else models.ResonanceClassification.EVOLUTION_H2
            )
        else:
            classification = models.ResonanceClassification.EVOLUTION_CENTER
    log.debug(f"{classification=}, {margin=}, kernel size {len(kernel)}")
    return models.ResonanceReport(
        kernel_modes=kernel,
        margin=margin,
        classification=classification,
        delta=delta,
        kmax=kmax,
        tolerance=relative,
    )


def _candidate_shells(dim: int, m: float, delta: float) -> list[models.WaveVector]:
    """Nonnegative k != 0 whose level set F_k(nu) = sum k_i^2 nu_i^2 in [m - delta,
    m + delta] can meet [1, 2]^d. Sign flips give the same set and are skipped."""
    if m + delta < 1.0:
        return []
    bound = int(np.floor(np.sqrt(m + delta)))
    shells = []
    for k in itertools.product(range(bound + 1), repeat=dim):
        squared = sum(ki**2 for ki in k)
        if squared == 0:
            continue
        if squared <= m + delta and 4 * squared >= m - delta:
            shells.append(k)
    return shells


def excluded_measure_estimate(
    dim: int,
    m: float,
    delta: float,
    kmax: int = 64,
    samples: int = 100_000,
    seed: int = 0,
) -> models.MeasureEstimate:
    """Measure of I = {nu in [1,2]^d : exists k, |F_k(nu) - m| <= delta}.

    The analytic bound uses the co-area estimate 2 delta * s / inf |grad F_k|
    per shell, s the number of nonzero entries of k (the level set inside the
    cube is a monotone graph, its area is at most s). The Monte Carlo estimate
    samples nu uniformly with the given seed.
    """
    if delta < 0:
        raise errors.ParameterNumberRangeError("delta", 0.0, np.inf, delta)
    shells = [k for k in _candidate_shells(dim, m, delta) if max(k) <= kmax]
    whole_cube = abs(m) <= delta
    analytic = 1.0 if whole_cube else 0.0
    for k in shells:
        active = sum(1 for ki in k if ki)
        gradient = 2.0 * np.sqrt(sum(ki**4 for ki in k))
        analytic += 2.0 * delta * active / gradient
    analytic = min(analytic, 1.0)

    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    shell_array = np.array(shells, dtype=float).reshape(-1, dim) ** 2
    while remaining > 0:
        chunk = min(remaining, _MEASURE_CHUNK)
        nu = rng.uniform(1.0, 2.0, size=(chunk, dim))
        if whole_cube:
            hits += chunk
        elif shell_array.size:
            values = (nu**2) @ shell_array.T
            hits += int(np.count_nonzero(np.any(np.abs(values - m) <= delta, axis=1)))
        remaining -= chunk
    fraction = hits / samples
    stderr = float(np.sqrt(fraction * (1.0 - fraction) / samples))
    log.debug(f"{dim=}, {m=}, {delta=}: {analytic=}, {fraction=}, {stderr=}")
    return models.MeasureEstimate(
        dim=dim,
        m=m,
        delta=delta,
        analytic_bound=float(analytic),
        monte_carlo=float(fraction),
        stderr=stderr,
        samples=samples,
        seed=seed,
    )
