"""Quadratic jets in the center coordinates z, sampled on a grid.

A jet holds the Taylor coefficients of q(z) = c0 + c1 . z + z . c2 . z per grid
point: c0 has the grid shape G, c1 has shape G + (n,), c2 has shape G + (n, n)
and is symmetric. Products and compositions drop every term of degree > 2.
"""

import typing

import numpy as np
import scipy.fft

from spectral_torus.spectral import expressions


class Jet(typing.NamedTuple):
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def n(self) -> int:
        return self.c1.shape[-1]


def zeros(shape: tuple[int, ...], n: int) -> Jet:
    return Jet(
        np.zeros(shape, dtype=np.complex128),
        np.zeros(shape + (n,), dtype=np.complex128),
        np.zeros(shape + (n, n), dtype=np.complex128),
    )


def constant(values: np.ndarray, n: int) -> Jet:
    values = np.asarray(values, dtype=np.complex128)
    return Jet(
        values,
        np.zeros(values.shape + (n,), dtype=np.complex128),
        np.zeros(values.shape + (n, n), dtype=np.complex128),
    )


def add(a: Jet, b: Jet) -> Jet:
    return Jet(a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2)


def scale(a: Jet, factor: typing.Any) -> Jet:
    """Multiplies by a number or by an array broadcasting against the grid."""
    factor = np.asarray(factor)
    return Jet(a.c0 * factor, a.c1 * factor[..., None], a.c2 * factor[..., None, None])


def linear_map(a: Jet, fn: typing.Callable[[np.ndarray], np.ndarray]) -> Jet:
    """Applies a map acting on the leading grid axes to every coefficient."""
    return Jet(fn(a.c0), fn(a.c1), fn(a.c2))


def _sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))


def multiply(a: Jet, b: Jet) -> Jet:
    return Jet(
        a.c0 * b.c0,
        a.c0[..., None] * b.c1 + b.c0[..., None] * a.c1,
        a.c0[..., None, None] * b.c2
        + b.c0[..., None, None] * a.c2
        + _sym(a.c1[..., :, None] * b.c1[..., None, :]),
    )


def compose(
    f: expressions.ScalarFunctionSpec,
    states: dict[str, Jet],
    positions: dict[str, np.ndarray],
    n: int,
) -> Jet:
    """f(positions, states) to second order:

    f(s0) + sum_i f_i (s1_i z + z s2_i z) + 1/2 sum_ij f_ij (s1_i z)(s1_j z)
    """
    names = list(states)
    values = {**positions, **{name: states[name].c0 for name in names}}
    shape = np.broadcast_shapes(*(np.shape(value) for value in values.values()))
    result = constant(np.broadcast_to(f.evaluate(values), shape), n)
    for i, name in enumerate(names):
        first = f.derivative(name)
        slope = np.broadcast_to(first.evaluate(values), shape)
        result = add(
            result,
            Jet(
                np.zeros(shape, dtype=np.complex128),
                slope[..., None] * states[name].c1,
                slope[..., None, None] * states[name].c2,
            ),
        )
        for j, other in enumerate(names[i:], start=i):
            curvature = np.broadcast_to(first.derivative(other).evaluate(values), shape)
            weight = 0.5 if i == j else 1.0
            outer = _sym(states[name].c1[..., :, None] * states[other].c1[..., None, :])
            result = add(
                result,
                Jet(
                    np.zeros(shape, dtype=np.complex128),
                    np.zeros(shape + (n,), dtype=np.complex128),
                    weight * curvature[..., None, None] * outer,
                ),
            )
    return result


def transport(w: Jet, g: Jet) -> Jet:
    """D_z w . g for w over grid (..., h) and a vector field g over grid (..., b),
    b indexing the center coordinates."""
    c0 = np.einsum("...hb,...b->...h", w.c1, g.c0)
    c1 = np.einsum("...hb,...ba->...ha", w.c1, g.c1) + 2.0 * np.einsum(
        "...hba,...b->...ha", w.c2, g.c0
    )
    c2 = np.einsum("...hb,...bac->...hac", w.c1, g.c2) + _sym(
        2.0 * np.einsum("...hba,...bc->...hac", w.c2, g.c1)
    )
    return Jet(c0, c1, c2)


def synthesize(coeffs: np.ndarray, cutoff: int, n: int, axes: typing.Sequence[int]) -> np.ndarray:
    """Grid values sum_k coeffs_k e^{ik.x} along `axes` (length 2 cutoff + 1 each)."""
    index = np.arange(-cutoff, cutoff + 1) % n
    padded = np.asarray(coeffs, dtype=np.complex128)
    for axis in axes:
        shape = list(padded.shape)
        shape[axis] = n
        target = np.zeros(shape, dtype=np.complex128)
        selector: list[typing.Any] = [slice(None)] * padded.ndim
        selector[axis] = index
        target[tuple(selector)] = padded
        padded = target
    return scipy.fft.ifftn(padded, axes=tuple(axes)) * n ** len(axes)


def analyze(values: np.ndarray, cutoff: int, axes: typing.Sequence[int]) -> np.ndarray:
    """Fourier coefficients |k_i| <= cutoff of grid values along `axes`."""
    n = values.shape[axes[0]]
    transformed = scipy.fft.fftn(values, axes=tuple(axes)) / n ** len(axes)
    index = np.arange(-cutoff, cutoff + 1) % n
    for axis in axes:
        transformed = np.take(transformed, index, axis=axis)
    return transformed
