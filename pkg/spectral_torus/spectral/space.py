"""Weighted Fourier norms, products, derivatives and Nemytskii operators.

All wave-vector lengths are |k| = sum_i |k_i|. Frequency (theta) axes and
spatial axes carry separate weights, so evolution fields get the product
weight e^{2 rho (|l| + |k|)} (1 + |l|^2)^r (1 + |k|^2)^r.
"""

import math
import typing

import numpy as np
import scipy.fft
import scipy.signal

from spectral_torus import errors
from spectral_torus.models import models
from spectral_torus.spectral import expressions
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)


def _l1_lengths(u: models.SpectralField) -> tuple[np.ndarray, np.ndarray]:
    axes = u.axis_wavenumbers()
    theta_length = sum((np.abs(axis) for axis in axes[: u.freq_dim]), np.zeros((1,) * u.n_axes))
    space_length = sum((np.abs(axis) for axis in axes[u.freq_dim :]), np.zeros((1,) * u.n_axes))
    return theta_length, space_length


def weights(
    u: models.SpectralField, p: models.SpaceParams, combined: bool = False
) -> np.ndarray:
    """Squared-norm weights per coefficient, broadcast to the coefficient shape.

    With combined=True, evolution fields use (1 + |l|^2 + |k|^2)^r instead of
    the product weight.
    """
    theta_length, space_length = _l1_lengths(u)
    analytic = np.exp(2.0 * p.rho * (theta_length + space_length))
    if u.freq_dim and not combined:
        sobolev = (1.0 + theta_length**2) ** p.r * (1.0 + space_length**2) ** p.r
    else:
        sobolev = (1.0 + theta_length**2 + space_length**2) ** p.r
    return np.broadcast_to(analytic * sobolev, u.coeffs.shape)


def norm(u: models.SpectralField, p: models.SpaceParams, combined: bool = False) -> float:
    """Exact weighted l2 sum over the stored coefficients."""
    squared = np.abs(u.coeffs) ** 2 * weights(u, p, combined)
    return float(np.sqrt(np.sum(squared.ravel())))


def inner(u: models.SpectralField, v: models.SpectralField) -> complex:
    """Coefficient inner product sum_k u_k conj(v_k)."""
    u._check_compatible(v)
    return complex(np.sum((u.coeffs * np.conj(v.coeffs)).ravel()))


def multiply(
    u: models.SpectralField, v: models.SpectralField, widen: bool = False
) -> models.SpectralField:
    """Fourier convolution of two fields.

    Galerkin truncation back to the common cutoff K, or with widen=True the
    full product with cutoff 2K.
    """
    u._check_compatible(v)
    full = scipy.signal.fftconvolve(u.coeffs, v.coeffs, mode="full")
    K = u.cutoff
    if widen:
        result = type(u)(
            dim=u.dim,
            cutoff=2 * K,
            coeffs=full,
            is_real=u.is_real and v.is_real,
            freq_dim=u.freq_dim,
        )
    else:
        window = tuple(slice(K, 3 * K + 1) for _ in range(u.n_axes))
        result = u.with_coeffs(full[window], u.is_real and v.is_real)
    return result.realified() if result.is_real else result


def derivative(u: models.SpectralField, axis: int, order: int = 1) -> models.SpectralField:
    """Multiplier (i k_axis)^order on spatial axis 1..d."""
    if not 1 <= axis <= u.dim:
        raise errors.ParameterNumberRangeError("axis", 1, u.dim, axis)
    if order not in (1, 2):
        raise errors.ParameterNumberRangeError("order", 1, 2, order)
    k = u.axis_wavenumbers()[u.freq_dim + axis - 1]
    return u.with_coeffs(u.coeffs * (1j * k) ** order)


def translate(u: models.SpectralField, shift: typing.Sequence[float]) -> models.SpectralField:
    """The field x -> u(x + shift) (spatial axes only)."""
    if len(shift) != u.dim:
        raise errors.DimensionMismatchError(expected=u.dim, found=len(shift), what="shift")
    phase = np.ones((1,) * u.n_axes, dtype=np.complex128)
    for k, s in zip(u.spatial_wavenumbers(), shift):
        phase = phase * np.exp(1j * k * s)
    return u.with_coeffs(u.coeffs * phase)


def sup_bound(u: models.SpectralField, p: models.SpaceParams) -> models.SupBound:
    """Certified bound sum |u_k| e^{rho |k|} of the sup over the complex strip.

    Also returns C_{d,r} = (sum_k (1+|k|^2)^{-r})^{1/2} over the truncation box,
    for which sup |u| <= C_{d,r} ||u||_{rho,r}.
    """
    p.require_algebra(u.n_axes)
    theta_length, space_length = _l1_lengths(u)
    bound = float(np.sum((np.abs(u.coeffs) * np.exp(p.rho * (theta_length + space_length))).ravel()))
    inverse_weights = 1.0 / weights(u, models.SpaceParams(rho=0.0, r=p.r))
    return models.SupBound(
        bound=bound, sobolev_constant=float(np.sqrt(np.sum(inverse_weights.ravel())))
    )


def coefficient_sum(u: models.SpectralField) -> float:
    """sum |u_k|, a bound of sup |u| on the real torus."""
    return float(np.sum(np.abs(u.coeffs).ravel()))


def collocation_size(f: expressions.ScalarFunctionSpec, cutoff: int) -> int:
    """Grid points per axis for applying f to fields with the given cutoff.

    A polynomial f of degree D whose x and theta dependence has bandwidth P
    produces modes up to D K + P; the grid keeps their aliases off the box
    |k| <= K. Transcendental f (in u or in the position) gets 4 (2K + 1).
    """
    band = 2 * cutoff + 1
    if f.degree is None or f.position_bandwidth is None:
        size = 4 * band
    else:
        spread = f.degree * cutoff + f.position_bandwidth
        size = max(max(math.ceil((f.degree + 1) / 2), 1) * band, spread + cutoff + 1)
    return scipy.fft.next_fast_len(size)


def grid_points(n: int, n_axes: int) -> list[np.ndarray]:
    line = 2.0 * np.pi * np.arange(n) / n
    result = []
    for axis in range(n_axes):
        shape = [1] * n_axes
        shape[axis] = n
        result.append(line.reshape(shape))
    return result


def _embed(coeffs: np.ndarray, cutoff: int, n: int) -> np.ndarray:
    n_axes = coeffs.ndim
    padded = np.zeros((n,) * n_axes, dtype=np.complex128)
    index = np.arange(-cutoff, cutoff + 1) % n
    padded[np.ix_(*([index] * n_axes))] = coeffs
    return padded


def coeffs_to_grid(coeffs: np.ndarray, cutoff: int, n: int) -> np.ndarray:
    n_axes = coeffs.ndim
    return scipy.fft.ifftn(_embed(coeffs, cutoff, n)) * n**n_axes


def grid_to_coeffs(values: np.ndarray, cutoff: int, axes: typing.Sequence[int] | None = None) -> np.ndarray:
    """Fourier coefficients |k| <= cutoff of grid values along the given axes."""
    axes = tuple(range(values.ndim)) if axes is None else tuple(axes)
    n = values.shape[axes[0]]
    transformed = scipy.fft.fftn(values, axes=axes) / n ** len(axes)
    index = np.arange(-cutoff, cutoff + 1) % n
    for axis in axes:
        transformed = np.take(transformed, index, axis=axis)
    return transformed


def to_grid(u: models.SpectralField, n: int) -> np.ndarray:
    """Values on the uniform grid 2 pi j / n in every axis."""
    if n < 2 * u.cutoff + 1:
        raise errors.ParameterNumberRangeError("grid size", 2 * u.cutoff + 1, math.inf, n)
    return coeffs_to_grid(u.coeffs, u.cutoff, n)


def from_grid(
    values: np.ndarray,
    dim: int,
    cutoff: int,
    is_real: bool = True,
    freq_dim: int = 0,
) -> models.SpectralField:
    field_cls = models.EvolutionField if freq_dim else models.SpectralField
    field = field_cls(
        dim=dim,
        cutoff=cutoff,
        coeffs=grid_to_coeffs(values, cutoff),
        is_real=is_real,
        freq_dim=freq_dim,
    )
    return field.realified() if is_real else field


def _state_grids(
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    n: int,
    theta: typing.Sequence[float] | None,
    derivs: typing.Sequence[int] | None,
) -> dict[str, np.ndarray]:
    if f.spatial_axes_used > u.dim:
        raise errors.DimensionMismatchError(
            expected=u.dim, found=f.spatial_axes_used, what="spatial dimension used by f"
        )
    if f.theta_axes_used > u.freq_dim and (theta is None or len(theta) < f.theta_axes_used):
        raise errors.DimensionMismatchError(
            expected=u.freq_dim, found=f.theta_axes_used, what="theta dimension used by f"
        )
    allowed_orders = {0, 1, 2} if derivs is None else {0, *derivs}
    points = grid_points(n, u.n_axes)
    values: dict[str, np.ndarray] = {}
    for j in range(u.freq_dim):
        values[f"theta{j + 1}"] = points[j]
    if u.freq_dim == 0 and theta is not None:
        for j, theta_j in enumerate(theta):
            values[f"theta{j + 1}"] = np.asarray(theta_j)
    for i in range(u.dim):
        values[f"x{i + 1}"] = points[u.freq_dim + i]
    for state in f.state_variables:
        if state.order not in allowed_orders:
            raise errors.UnknownVariableError(
                state.name, [s.name for s in f.state_variables if s.order in allowed_orders]
            )
        field = u
        for axis in state.axes:
            field = derivative(field, axis, 1)
        values[state.name] = to_grid(field, n)
    return values


def nonlinearity_on_grid(
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    n: int,
    derivs: typing.Sequence[int] | None = None,
    theta: typing.Sequence[float] | None = None,
) -> np.ndarray:
    """Pointwise values f(theta, x, u, Du, D^2u) on the uniform n-grid, untruncated."""
    if f.domain_radius is not None and coefficient_sum(u) > f.domain_radius:
        raise errors.DomainBallError(coefficient_sum(u), f.domain_radius)
    values = _state_grids(f, u, n, theta, derivs)
    return np.broadcast_to(f.evaluate(values), (n,) * u.n_axes)


def apply_nonlinearity(
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    derivs: typing.Sequence[int] | None = None,
    theta: typing.Sequence[float] | None = None,
) -> models.SpectralField:
    """F[u] = f(theta, x, u, Du, D^2u), Galerkin-truncated to the cutoff of u.

    Args:
        f: the nonlinearity.
        u: field to compose with.
        derivs: derivative orders the caller allows f to use (default all).
        theta: fixed theta values when f depends on theta but u is a spatial field.

    Raises:
        DomainBallError: if f has a finite domain radius and sum |u_k| exceeds it.
        UnknownVariableError: if f needs a derivative order not in derivs.
    """
    n = collocation_size(f, u.cutoff)
    grid = nonlinearity_on_grid(f, u, n, derivs, theta)
    return from_grid(
        np.broadcast_to(grid, (n,) * u.n_axes),
        u.dim,
        u.cutoff,
        is_real=u.is_real,
        freq_dim=u.freq_dim,
    )


def apply_derivative(
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    v: models.SpectralField,
    theta: typing.Sequence[float] | None = None,
) -> models.SpectralField:
    """Frechet derivative Df(u) v = sum_s (df/ds)(u) D^s v on the collocation grid of f."""
    u._check_compatible(v)
    n = collocation_size(f, u.cutoff)
    values = _state_grids(f, u, n, theta, None)
    total = np.zeros((n,) * u.n_axes, dtype=np.complex128)
    for state in f.state_variables:
        direction = v
        for axis in state.axes:
            direction = derivative(direction, axis, 1)
        partial = f.derivative(state.name).evaluate(values)
        total = total + partial * to_grid(direction, n)
    return from_grid(
        total, u.dim, u.cutoff, is_real=u.is_real and v.is_real, freq_dim=u.freq_dim
    )
