"""Quadratic jet of the time-dependent center manifold of

    u_tt = -sum nu_i^2 d^2u/dx_i^2 - m u + eps f(theta, x, u, Du),   theta = omega t,

written as z_t = A z + eps N(theta, z) for z = (u, u_t).

Coordinates. A hyperbolic mode k (sigma_k = sum nu_i^2 k_i^2 - m > 0,
rho = sqrt(sigma_k)) is split into c^+- = (u_k +- v_k / rho) / 2, which evolve by
c^+-_t = +-rho c^+- +- eps f_k / (2 rho). The center modes are collected into
real coordinates z: for k = 0 the pair (s u_0, v_0) and for every representative
k != 0 (first nonzero entry positive) the quadruple
(Re s u_k, Im s u_k, Re v_k, Im v_k), with s = |sigma_k|^{1/2} (1 if sigma_k = 0).
Each pair evolves by the block [[0, s], [sigma_k / s, 0]], a rotation when
sigma_k < 0.

The manifold is the graph c_h = w_h(theta, z). Its quadratic jet solves

    w_h(theta, z) = int e^{-lambda_h tau} R_h(theta + omega tau, e^{A_c tau} z) dtau,
    R = eps (g(theta, z, w) - D_z w . G_c(theta, z, w)),

over (-inf, 0] for stable and (with a minus sign) over [0, inf) for unstable
modes, g and G_c being the hyperbolic and center parts of the forcing. The
cut-off of the prepared equation equals 1 near z = 0 and drops out of the jet.
"""

import itertools
import math
import typing

import numpy as np
import pydantic
import scipy.fft
import scipy.integrate
import scipy.linalg
import scipy.special
import tqdm

from spectral_torus import errors
from spectral_torus.config import config
from spectral_torus.manifold import jets
from spectral_torus.models import models
from spectral_torus.spectral import expressions
from spectral_torus.spectral import space as spectral_space
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

THETA_TAIL_TOLERANCE = 1e-12
ODE_RTOL = 1e-12
ODE_ATOL = 1e-16

Block = typing.Literal["s", "u", "c"]


def assemble_system(spec: models.EllipticOperatorSpec, cutoff: int) -> models.FirstOrderSystem:
    """The first-order operator A for the spatial part of `spec` on the box |k_i| <= cutoff."""
    if isinstance(spec, models.EvolutionOperatorSpec):
        spec = spec.spatial()
    return models.FirstOrderSystem(spec=spec, cutoff=cutoff)


def _box(dim: int, cutoff: int) -> typing.Iterator[models.WaveVector]:
    return itertools.product(range(-cutoff, cutoff + 1), repeat=dim)


def split_spectrum(
    system: models.FirstOrderSystem,
    policy: models.SplittingPolicy = models.SplittingPolicy(),
) -> models.SpectralSplitting:
    """Partitions every (k, sign) of the box into stable, unstable and center parts.

    Raises:
        EmptyHyperbolicSpectrumError: every mode of the box is a center mode.
    """
    stable, unstable, center = [], [], []
    hyperbolic_rates, center_rates = [], [0.0]
    for k in _box(system.dim, system.cutoff):
        sigma = system.sigma(k)
        rate = math.sqrt(sigma) if sigma > 0.0 else 0.0
        if rate > policy.slow_rate:
            stable.append((k, -1))
            unstable.append((k, 1))
            hyperbolic_rates.append(rate)
        else:
            center.extend([(k, 1), (k, -1)])
            center_rates.append(rate)
    if not hyperbolic_rates:
        raise errors.EmptyHyperbolicSpectrumError(system.cutoff)
    beta = min(hyperbolic_rates)
    slow = max(center_rates)
    log.info(
        f"spectral splitting: {len(center)} center, {2 * len(stable)} hyperbolic modes, beta={beta:.6g}"
    )
    return models.SpectralSplitting(
        nu=system.spec.nu,
        m=system.spec.m,
        cutoff=system.cutoff,
        stable_modes=stable,
        unstable_modes=unstable,
        center_modes=center,
        beta1=beta,
        beta2=beta,
        beta3_minus=slow,
        beta3_plus=slow,
        slow_rate=policy.slow_rate,
    )


def _system_of(splitting: models.SpectralSplitting) -> models.FirstOrderSystem:
    return models.FirstOrderSystem(
        spec=models.EllipticOperatorSpec(nu=splitting.nu, m=splitting.m),
        cutoff=splitting.cutoff,
    )


def _center_mask(splitting: models.SpectralSplitting) -> np.ndarray:
    mask = np.zeros((2 * splitting.cutoff + 1,) * splitting.dim, dtype=bool)
    for k in splitting.center_wave_vectors():
        mask[tuple(ki + splitting.cutoff for ki in k)] = True
    return mask


def _check_state(splitting: models.SpectralSplitting, z: models.FirstOrderState) -> None:
    if (z.u.dim, z.u.cutoff, z.u.freq_dim) != (splitting.dim, splitting.cutoff, 0):
        raise errors.DimensionMismatchError(
            expected=(splitting.dim, splitting.cutoff, 0),
            found=(z.u.dim, z.u.cutoff, z.u.freq_dim),
            what="(dim, cutoff, freq_dim)",
        )


def _hyperbolic_parts(
    splitting: models.SpectralSplitting, z: models.FirstOrderState
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, c^+, c^-) on the box, zero on center modes."""
    sigma = _system_of(splitting).sigma_grid()
    hyperbolic = ~_center_mask(splitting)
    rho = np.where(hyperbolic, np.sqrt(np.abs(sigma)), 0.0)
    ratio = np.divide(z.v.coeffs, rho, out=np.zeros_like(z.v.coeffs), where=hyperbolic)
    plus = np.where(hyperbolic, 0.5 * (z.u.coeffs + ratio), 0.0)
    minus = np.where(hyperbolic, 0.5 * (z.u.coeffs - ratio), 0.0)
    return rho, plus, minus


def semigroup_apply(
    splitting: models.SpectralSplitting,
    block: Block,
    t: float,
    z: models.FirstOrderState,
) -> models.FirstOrderState:
    """e^{A t} restricted to one spectral part, applied to the projection of z.

    Raises:
        WrongTimeDirectionError: t < 0 for the stable or t > 0 for the unstable part.
    """
    _check_state(splitting, z)
    if (block == "s" and t < 0.0) or (block == "u" and t > 0.0):
        raise errors.WrongTimeDirectionError(block, t)
    if block in ("s", "u"):
        rho, plus, minus = _hyperbolic_parts(splitting, z)
        sign = -1.0 if block == "s" else 1.0
        coordinate = (minus if block == "s" else plus) * np.exp(sign * rho * t)
        return models.FirstOrderState(
            u=z.u.with_coeffs(coordinate), v=z.v.with_coeffs(sign * rho * coordinate)
        )

    system = _system_of(splitting)
    u = np.zeros_like(z.u.coeffs)
    v = np.zeros_like(z.v.coeffs)
    for k in splitting.center_wave_vectors():
        position = tuple(ki + splitting.cutoff for ki in k)
        flow = scipy.linalg.expm(system.block(k) * t)
        u[position], v[position] = flow @ np.array([z.u.coeffs[position], z.v.coeffs[position]])
    return models.FirstOrderState(u=z.u.with_coeffs(u), v=z.v.with_coeffs(v))


def spectral_norm(
    splitting: models.SpectralSplitting,
    z: models.FirstOrderState,
    space: models.SpaceParams = models.SpaceParams(),
) -> float:
    """Norm in eigen-coordinates, sum_k w(k) (|c^+_k|^2 + |c^-_k|^2) on hyperbolic and
    sum_k w(k) (s_k^2 |u_k|^2 + |v_k|^2) on center modes.

    The stable and unstable semigroups decay at exactly rate rho_k in it and the
    center flow is an isometry whenever every center sigma_k is negative.
    """
    _check_state(splitting, z)
    weights = spectral_space.weights(z.u, space)
    center = _center_mask(splitting)
    sigma = _system_of(splitting).sigma_grid()
    scale = np.where(sigma == 0.0, 1.0, np.abs(sigma))
    _, plus, minus = _hyperbolic_parts(splitting, z)
    squared = np.where(
        center,
        scale * np.abs(z.u.coeffs) ** 2 + np.abs(z.v.coeffs) ** 2,
        np.abs(plus) ** 2 + np.abs(minus) ** 2,
    )
    return float(np.sqrt(np.sum((weights * squared).ravel())))


def smoothstep(t: float, order: int) -> float:
    """The polynomial step of class C^order from 0 at t = 0 to 1 at t = 1."""
    t = float(np.clip(t, 0.0, 1.0))
    j = np.arange(order + 1)
    coefficients = scipy.special.comb(order + j, j) * scipy.special.comb(2 * order + 1, order - j)
    return float(t ** (order + 1) * np.sum(coefficients * (-t) ** j))


class CutoffFunction(models.BaseModel):
    """phi(z) = 1 for |z| <= radius / 2, 0 for |z| >= radius, C^r_smooth in between."""

    r_smooth: int = pydantic.Field(ge=1)
    radius: float = pydantic.Field(gt=0.0)

    def __call__(self, z: np.ndarray) -> float:
        s = float(np.linalg.norm(z)) / self.radius
        if s <= 0.5:
            return 1.0
        if s >= 1.0:
            return 0.0
        return 1.0 - smoothstep(2.0 * s - 1.0, self.r_smooth)


def prepare_cutoff(r_smooth: int, radius: float) -> CutoffFunction:
    return CutoffFunction(r_smooth=r_smooth, radius=radius)


class CenterCoordinate(typing.NamedTuple):
    k: models.WaveVector
    part: str
    scale: float
    sigma: float


class QuadratureRule(typing.NamedTuple):
    """Nodes and weights of one Duhamel integral, weights carrying the sign of
    the unstable formula, and e^{A_c tau} at every node."""

    members: np.ndarray
    rate: float
    nodes: np.ndarray
    weights: np.ndarray
    flows: np.ndarray


def _center_coordinates(
    system: models.FirstOrderSystem, splitting: models.SpectralSplitting
) -> list[CenterCoordinate]:
    coordinates = []
    for k in splitting.center_wave_vectors():
        nonzero = [ki for ki in k if ki != 0]
        if nonzero and nonzero[0] < 0:
            continue
        sigma = system.sigma(k)
        scale = math.sqrt(abs(sigma)) if sigma != 0.0 else 1.0
        parts = ("re_p", "im_p", "re_q", "im_q") if nonzero else ("p", "q")
        coordinates.extend(CenterCoordinate(k, part, scale, sigma) for part in parts)
    return coordinates


def _center_matrix(coordinates: list[CenterCoordinate]) -> np.ndarray:
    n_c = len(coordinates)
    matrix = np.zeros((n_c, n_c))
    index = {(c.k, c.part): i for i, c in enumerate(coordinates)}
    for (k, part), i in index.items():
        if part.endswith("p"):
            j = index[(k, part[:-1] + "q")]
            coordinate = coordinates[i]
            matrix[i, j] = coordinate.scale
            matrix[j, i] = coordinate.sigma / coordinate.scale
    return matrix


def _center_maps(
    coordinates: list[CenterCoordinate], dim: int, cutoff: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u basis, v basis, forcing selector) between z and flattened coefficients.

    u_k = sum_a u_basis[k, a] z_a, likewise v, and G_c = Re(selector @ f_k).
    """
    size = (2 * cutoff + 1) ** dim
    shape = (2 * cutoff + 1,) * dim
    n_c = len(coordinates)
    u_basis = np.zeros((size, n_c), dtype=np.complex128)
    v_basis = np.zeros((size, n_c), dtype=np.complex128)
    selector = np.zeros((n_c, size), dtype=np.complex128)

    def flat(k: models.WaveVector) -> int:
        return int(np.ravel_multi_index(tuple(ki + cutoff for ki in k), shape))

    for a, coordinate in enumerate(coordinates):
        here = flat(coordinate.k)
        there = flat(tuple(-ki for ki in coordinate.k))
        basis = u_basis if coordinate.part.endswith("p") else v_basis
        factor = 1.0 / coordinate.scale if basis is u_basis else 1.0
        if coordinate.part in ("p", "q"):
            basis[here, a] = factor
        elif coordinate.part.startswith("re"):
            basis[here, a] += factor
            basis[there, a] += factor
        else:
            basis[here, a] += 1j * factor
            basis[there, a] -= 1j * factor
        if coordinate.part in ("q", "re_q"):
            selector[a, here] = 1.0
        elif coordinate.part == "im_q":
            selector[a, here] = -1j
    return u_basis, v_basis, selector


def graded_panels(horizon: float, quad: config.QuadratureConfig) -> np.ndarray:
    """Panel edges 0 = t_0 < t_1 < ... < t_n = horizon, widths growing geometrically."""
    edges = [0.0]
    width = quad.first_panel
    while edges[-1] < horizon:
        edges.append(min(edges[-1] + width, horizon))
        width = min(width * quad.panel_growth, quad.max_panel)
    return np.array(edges)


def _quadrature_rule(
    members: np.ndarray,
    rate: float,
    center_matrix: np.ndarray,
    quad: config.QuadratureConfig,
) -> QuadratureRule:
    beta = abs(rate)
    horizon = math.log(1.0 / quad.tail_tol) / beta
    if horizon > quad.max_horizon:
        raise errors.QuadratureTailError(beta, quad.tail_tol, horizon, quad.max_horizon)
    edges = graded_panels(horizon, quad)
    reference_nodes, reference_weights = np.polynomial.legendre.leggauss(quad.gauss_order)
    half = 0.5 * np.diff(edges)
    middle = 0.5 * (edges[1:] + edges[:-1])
    nodes = (middle[:, None] + half[:, None] * reference_nodes[None, :]).ravel()
    weights = (half[:, None] * reference_weights[None, :]).ravel()
    if rate < 0.0:
        nodes = -nodes
    else:
        weights = -weights
    flows = np.stack([scipy.linalg.expm(center_matrix * tau) for tau in nodes])
    log.debug(f"{rate=:.6g}, {horizon=:.3f}, panels={edges.size - 1}")
    return QuadratureRule(members, rate, nodes, weights, flows)


class PreparedSystem(models.ArrayModel):
    """The truncated prepared system with everything the jet iteration reuses."""

    spec: models.EvolutionOperatorSpec
    f: expressions.ScalarFunctionSpec
    epsilon: float
    cutoff: int
    splitting: models.SpectralSplitting
    cutoff_fn: CutoffFunction
    manifold: config.ManifoldConfig
    center: list[CenterCoordinate]
    center_matrix: np.ndarray
    center_u: np.ndarray
    center_v: np.ndarray
    center_selector: np.ndarray
    hyperbolic: list[models.SpectralMode]
    rates: np.ndarray
    gains: np.ndarray
    positions: np.ndarray
    rules: list[QuadratureRule]
    n_theta: int
    n_x: int

    @property
    def freq_dim(self) -> int:
        return self.spec.freq_dim

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def n_center(self) -> int:
        return len(self.center)

    @property
    def theta_modes(self) -> int:
        return self.manifold.theta_modes

    def theta_frequencies(self) -> np.ndarray:
        """l . omega over the theta box."""
        line = np.arange(-self.theta_modes, self.theta_modes + 1)
        total = np.zeros((1,) * self.freq_dim)
        for j, omega_j in enumerate(self.spec.omega):
            shape = [1] * self.freq_dim
            shape[j] = line.size
            total = total + omega_j * line.reshape(shape)
        return np.broadcast_to(total, (line.size,) * self.freq_dim)

    def zero_jet(self) -> models.ManifoldJet:
        return models.ManifoldJet.zeros(
            self.freq_dim, self.theta_modes, self.hyperbolic, self.n_center
        )


def _grid_positions(
    spec: models.EvolutionOperatorSpec, n_theta: int, n_x: int
) -> dict[str, np.ndarray]:
    b, d = spec.freq_dim, spec.dim
    shape = (n_theta,) * b + (n_x,) * d
    positions = {}
    for axis, n in enumerate([n_theta] * b + [n_x] * d):
        line_shape = [1] * (b + d)
        line_shape[axis] = n
        line = (2.0 * np.pi * np.arange(n) / n).reshape(line_shape)
        name = f"theta{axis + 1}" if axis < b else f"x{axis - b + 1}"
        positions[name] = np.broadcast_to(line, shape)
    return positions


def _check_forcing(
    spec: models.EvolutionOperatorSpec,
    f: expressions.ScalarFunctionSpec,
    theta_modes: int,
    n_x: int,
) -> None:
    if f.order > 1:
        raise errors.UnknownVariableError(
            [s.name for s in f.state_variables if s.order > 1][0],
            [s.name for s in f.state_variables if s.order <= 1],
        )
    if f.theta_axes_used > spec.freq_dim:
        raise errors.DimensionMismatchError(
            expected=spec.freq_dim, found=f.theta_axes_used, what="theta dimension used by f"
        )
    if f.spatial_axes_used > spec.dim:
        raise errors.DimensionMismatchError(
            expected=spec.dim, found=f.spatial_axes_used, what="spatial dimension used by f"
        )
    fine = scipy.fft.next_fast_len(4 * (2 * theta_modes + 1))
    values = dict(_grid_positions(spec, fine, n_x))
    shape = next(iter(values.values())).shape
    for state in f.state_variables:
        values[state.name] = np.zeros(shape)
    grid = np.broadcast_to(f.evaluate(values), shape)
    theta_axes = tuple(range(spec.freq_dim))
    transformed = scipy.fft.fftn(grid, axes=theta_axes) / fine**spec.freq_dim
    outside = np.zeros((1,) * grid.ndim, dtype=bool)
    for axis in theta_axes:
        line_shape = [1] * grid.ndim
        line_shape[axis] = fine
        wavenumbers = np.rint(np.fft.fftfreq(fine) * fine).reshape(line_shape)
        outside = outside | (np.abs(wavenumbers) > theta_modes)
    energy = np.abs(transformed) ** 2
    tail = float(np.sqrt(np.sum(np.where(outside, energy, 0.0))))
    total = float(np.sqrt(np.sum(energy)))
    if tail > THETA_TAIL_TOLERANCE * max(1.0, total):
        raise errors.ThetaTruncationError(theta_modes, tail)


def prepare_system(
    spec: models.EvolutionOperatorSpec,
    f: expressions.ScalarFunctionSpec,
    epsilon: float,
    cutoff: int,
    manifold: config.ManifoldConfig = config.ManifoldConfig(),
    quad: config.QuadratureConfig = config.QuadratureConfig(),
) -> PreparedSystem:
    """Splits the spectrum and precomputes coordinates, grids and quadrature rules.

    Raises:
        EmptyHyperbolicSpectrumError: no hyperbolic mode with |k_i| <= cutoff.
        ThetaTruncationError: f(theta, x, 0) has theta modes beyond manifold.theta_modes.
        QuadratureTailError: a hyperbolic rate is too small for quad.tail_tol.
    """
    n_theta = spectral_space.collocation_size(f, manifold.theta_modes)
    n_x = spectral_space.collocation_size(f, cutoff)
    _check_forcing(spec, f, manifold.theta_modes, n_x)

    system = assemble_system(spec, cutoff)
    splitting = split_spectrum(system, models.SplittingPolicy(slow_rate=manifold.slow_rate))
    center = _center_coordinates(system, splitting)
    center_matrix = _center_matrix(center)
    center_u, center_v, center_selector = _center_maps(center, spec.dim, cutoff)

    hyperbolic = splitting.hyperbolic_modes()
    shape = (2 * cutoff + 1,) * spec.dim
    rho = np.array([math.sqrt(system.sigma(k)) for k, _ in hyperbolic])
    signs = np.array([sign for _, sign in hyperbolic], dtype=float)
    positions = np.array(
        [np.ravel_multi_index(tuple(ki + cutoff for ki in k), shape) for k, _ in hyperbolic],
        dtype=int,
    )

    groups: dict[tuple[float, int], list[int]] = {}
    for h, (_, sign) in enumerate(hyperbolic):
        groups.setdefault((round(float(rho[h]), 12), sign), []).append(h)
    rules = [
        _quadrature_rule(np.array(members), sign * float(rho[members[0]]), center_matrix, quad)
        for (_, sign), members in sorted(groups.items())
    ]
    log.info(
        f"prepared system: n_center={len(center)}, n_hyperbolic={len(hyperbolic)}, {n_theta=}, {n_x=}"
    )
    return PreparedSystem(
        spec=spec,
        f=f,
        epsilon=epsilon,
        cutoff=cutoff,
        splitting=splitting,
        cutoff_fn=prepare_cutoff(manifold.r_smooth, manifold.cutoff_radius),
        manifold=manifold,
        center=center,
        center_matrix=center_matrix,
        center_u=center_u,
        center_v=center_v,
        center_selector=center_selector,
        hyperbolic=hyperbolic,
        rates=signs * rho,
        gains=signs / (2.0 * rho),
        positions=positions,
        rules=rules,
        n_theta=n_theta,
        n_x=n_x,
    )


def _as_jet(jet: models.ManifoldJet) -> jets.Jet:
    return jets.Jet(
        np.asarray(jet.constant), np.asarray(jet.linear), np.asarray(jet.quadratic)
    )


def _field_jet(jet: models.ManifoldJet, system: PreparedSystem) -> jets.Jet:
    """Coefficients of u(theta, x; z) over the (l, k) box, as a jet in z."""
    b, d = system.freq_dim, system.dim
    theta_shape = (2 * system.theta_modes + 1,) * b
    space_shape = (2 * system.cutoff + 1,) * d
    size = int(np.prod(space_shape))

    def scatter(values: np.ndarray) -> np.ndarray:
        extra = values.shape[b + 1 :]
        target = np.zeros(theta_shape + (size,) + extra, dtype=np.complex128)
        np.add.at(target, (slice(None),) * b + (system.positions,), values)
        return target

    w = _as_jet(jet)
    linear = scatter(w.c1)
    linear[(system.theta_modes,) * b] += system.center_u
    return jets.Jet(
        scatter(w.c0).reshape(theta_shape + space_shape),
        linear.reshape(theta_shape + space_shape + (system.n_center,)),
        scatter(w.c2).reshape(theta_shape + space_shape + (system.n_center,) * 2),
    )


def _derivative_factor(system: PreparedSystem, axes: tuple[int, ...]) -> np.ndarray:
    b, d = system.freq_dim, system.dim
    line = np.arange(-system.cutoff, system.cutoff + 1)
    factor = np.ones((1,) * (b + d), dtype=np.complex128)
    for axis in axes:
        shape = [1] * (b + d)
        shape[b + axis - 1] = line.size
        factor = factor * (1j * line.reshape(shape))
    return factor


def _forcing_parts(
    F: jets.Jet, system: PreparedSystem, theta_axes: int
) -> tuple[jets.Jet, jets.Jet]:
    """Hyperbolic forcing g_h and center forcing G_c from coefficient jets whose
    first `theta_axes` axes are theta and the next ones the k box."""
    b, d = theta_axes, system.dim

    def flatten(values: np.ndarray) -> np.ndarray:
        return values.reshape(values.shape[:b] + (-1,) + values.shape[b + d :])

    def hyperbolic(values: np.ndarray) -> np.ndarray:
        taken = np.take(flatten(values), system.positions, axis=b)
        return taken * system.gains.reshape((-1,) + (1,) * (taken.ndim - b - 1))

    def center(values: np.ndarray) -> np.ndarray:
        projected = np.tensordot(system.center_selector, flatten(values), axes=([1], [b]))
        return np.real(np.moveaxis(projected, 0, b)).astype(np.complex128)

    return jets.linear_map(F, hyperbolic), jets.linear_map(F, center)


def invariance_forcing(jet: models.ManifoldJet, system: PreparedSystem) -> jets.Jet:
    """R = eps (g - D_z w . G_c) per theta mode, with (theta modes, h) leading axes."""
    b, d = system.freq_dim, system.dim
    theta_axes = tuple(range(b))
    space_axes = tuple(range(b, b + d))
    L, K = system.theta_modes, system.cutoff

    def to_grid(values: np.ndarray) -> np.ndarray:
        on_theta = jets.synthesize(values, L, system.n_theta, theta_axes)
        return jets.synthesize(on_theta, K, system.n_x, space_axes)

    u = _field_jet(jet, system)
    states = {
        state.name: jets.linear_map(
            jets.scale(u, _derivative_factor(system, state.axes)), to_grid
        )
        for state in system.f.state_variables
    }
    positions = _grid_positions(system.spec, system.n_theta, system.n_x)
    F = jets.compose(system.f, states, positions, system.n_center)
    F = jets.linear_map(F, lambda values: jets.analyze(values, K, space_axes))
    g, G = _forcing_parts(F, system, b)

    w = jets.linear_map(
        _as_jet(jet), lambda values: jets.synthesize(values, L, system.n_theta, theta_axes)
    )
    R = jets.scale(
        jets.add(g, jets.scale(jets.transport(w, G), -1.0)),
        system.epsilon,
    )
    return jets.linear_map(R, lambda values: jets.analyze(values, L, theta_axes))


def duhamel_update(jet: models.ManifoldJet, system: PreparedSystem) -> models.ManifoldJet:
    """One application of the stable/unstable Duhamel formulas to the jet.

    Along the linear center flow the forcing R(theta + omega tau, e^{A_c tau} z) stays
    quadratic in z, so each theta mode l and hyperbolic mode h integrates to

        constant = sum_q W_q r0,  linear = sum_q W_q r1 E_q,  quadratic = sum_q W_q E_q^T r2 E_q

    with W_q = weight_q e^{(i l.omega - lambda_h) tau_q} and E_q = e^{A_c tau_q}.
    """
    R = invariance_forcing(jet, system)
    theta_shape = R.c0.shape[: system.freq_dim]
    n_h, n_c = len(system.hyperbolic), system.n_center
    r0 = R.c0.reshape(-1, n_h)
    r1 = R.c1.reshape(-1, n_h, n_c)
    r2 = R.c2.reshape(-1, n_h, n_c, n_c)
    frequencies = system.theta_frequencies().ravel()

    constant = np.zeros_like(r0)
    linear = np.zeros_like(r1)
    quadratic = np.zeros_like(r2)
    for rule in system.rules:
        exponent = -rule.rate + 1j * frequencies
        W = rule.weights[None, :] * np.exp(exponent[:, None] * rule.nodes[None, :])
        members = rule.members
        constant[:, members] = W.sum(axis=1)[:, None] * r0[:, members]
        linear[:, members] = np.einsum("lq,lhb,qba->lha", W, r1[:, members], rule.flows)
        quadratic[:, members] = np.einsum(
            "lq,qba,lhbc,qcd->lhad", W, rule.flows, r2[:, members], rule.flows, optimize=True
        )
    return jet.with_coefficients(
        constant.reshape(theta_shape + (n_h,)),
        linear.reshape(theta_shape + (n_h, n_c)),
        quadratic.reshape(theta_shape + (n_h, n_c, n_c)),
    )


class ManifoldOutcome(typing.NamedTuple):
    jet: models.ManifoldJet
    updates: int
    distances: list[float]
    contraction_ratios: list[float]


def compute_manifold(system: PreparedSystem, show_progress: bool = False) -> ManifoldOutcome:
    """Iterates duhamel_update from the zero jet until successive jets agree to jet_tol.

    Raises:
        MaxIterationsError: no convergence within manifold.max_updates updates.
    """
    jet = system.zero_jet()
    distances: list[float] = []
    ratios: list[float] = []
    for update in tqdm.tqdm(
        range(1, system.manifold.max_updates + 1), desc="Duhamel updates", disable=not show_progress
    ):
        updated = duhamel_update(jet, system)
        distance = updated.distance(jet)
        if distances and distances[-1] > 0.0:
            ratios.append(distance / distances[-1])
        distances.append(distance)
        jet = updated
        log.debug(f"{update=}, {distance=:.3e}")
        if distance <= system.manifold.jet_tol:
            log.info(
                f"center manifold jet converged after {update} update(s), max ratio={max(ratios, default=0.0):.3e}"
            )
            return ManifoldOutcome(jet, update, distances, ratios)
    raise errors.MaxIterationsError(system.manifold.max_updates, distances[-1])


def linear_response_jet(system: PreparedSystem) -> models.ManifoldJet:
    """Closed-form jet for forcing that does not depend on the state:
    w_h = eps g_{h,l} / (i l.omega - lambda_h), linear and quadratic parts zero."""
    b, d = system.freq_dim, system.dim
    theta_axes = tuple(range(b))
    space_axes = tuple(range(b, b + d))
    values = dict(_grid_positions(system.spec, system.n_theta, system.n_x))
    shape = next(iter(values.values())).shape
    for state in system.f.state_variables:
        values[state.name] = np.zeros(shape)
    grid = np.broadcast_to(system.f.evaluate(values), shape)
    coefficients = jets.analyze(
        jets.analyze(grid, system.cutoff, space_axes), system.theta_modes, theta_axes
    )
    F = jets.constant(coefficients, system.n_center)
    g, _ = _forcing_parts(F, system, b)
    frequencies = system.theta_frequencies()[..., None]
    constant = system.epsilon * g.c0 / (1j * frequencies - system.rates)
    zero = system.zero_jet()
    return zero.with_coefficients(constant, zero.linear, zero.quadratic)


def _state_field(system: PreparedSystem, z: np.ndarray, c: np.ndarray) -> models.SpectralField:
    coefficients = system.center_u @ z
    np.add.at(coefficients, system.positions, c)
    shape = (2 * system.cutoff + 1,) * system.dim
    return models.SpectralField(
        dim=system.dim, cutoff=system.cutoff, coeffs=coefficients.reshape(shape)
    ).realified()


def _forcing_coefficients(
    system: PreparedSystem, theta: np.ndarray, z: np.ndarray, c: np.ndarray
) -> np.ndarray:
    u = _state_field(system, z, c)
    forcing = spectral_space.apply_nonlinearity(system.f, u, derivs=(1,), theta=list(theta))
    return forcing.coeffs.ravel()


def reduced_ode_rhs(
    theta: typing.Sequence[float],
    z: np.ndarray,
    jet: models.ManifoldJet,
    system: PreparedSystem,
) -> np.ndarray:
    """dz/dt = A_c z + eps phi(z) G_c(theta, z, w(theta, z))."""
    z = np.asarray(z, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c = jet.evaluate(theta, z)
    forcing = _forcing_coefficients(system, theta, z, c)
    weight = system.epsilon * system.cutoff_fn(z)
    return system.center_matrix @ z + weight * np.real(system.center_selector @ forcing)


class ReducedTrajectory(typing.NamedTuple):
    times: np.ndarray
    states: np.ndarray


def integrate_reduced_ode(
    jet: models.ManifoldJet,
    system: PreparedSystem,
    z0: typing.Sequence[float],
    t_final: float,
    points: int = 101,
) -> ReducedTrajectory:
    """Trajectory of the reduced ODE from z(0) = z0 with theta(t) = omega t."""
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (system.n_center,):
        raise errors.DimensionMismatchError(
            expected=system.n_center, found=z0.shape, what="center coordinates"
        )
    omega = np.asarray(system.spec.omega)
    times = np.linspace(0.0, t_final, points)
    solution = scipy.integrate.solve_ivp(
        lambda t, z: reduced_ode_rhs(omega * t, z, jet, system),
        (0.0, t_final),
        z0,
        method="DOP853",
        t_eval=times,
        rtol=1e-10,
        atol=1e-13,
    )
    if not solution.success:
        raise errors.MaxIterationsError(points, float("nan"))
    return ReducedTrajectory(solution.t, solution.y.T)


def prepared_rhs(
    system: PreparedSystem, theta0: np.ndarray
) -> typing.Callable[[float, np.ndarray], np.ndarray]:
    """Right side of the truncated prepared system for y = (z, Re c, Im c)."""
    n_c, n_h = system.n_center, len(system.hyperbolic)
    omega = np.asarray(system.spec.omega)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        z = y[:n_c]
        c = y[n_c : n_c + n_h] + 1j * y[n_c + n_h :]
        forcing = _forcing_coefficients(system, theta0 + omega * t, z, c)
        weight = system.epsilon * system.cutoff_fn(z)
        dz = system.center_matrix @ z + weight * np.real(system.center_selector @ forcing)
        dc = system.rates * c + weight * system.gains * forcing[system.positions]
        return np.concatenate([dz, dc.real, dc.imag])

    return rhs


def _defect_state(system: PreparedSystem, defect: np.ndarray) -> models.FirstOrderState:
    shape = (2 * system.cutoff + 1,) * system.dim
    u = np.zeros(int(np.prod(shape)), dtype=np.complex128)
    v = np.zeros_like(u)
    np.add.at(u, system.positions, defect)
    np.add.at(v, system.positions, system.rates * defect)
    return models.FirstOrderState(
        u=models.SpectralField(dim=system.dim, cutoff=system.cutoff, coeffs=u.reshape(shape), is_real=False),
        v=models.SpectralField(dim=system.dim, cutoff=system.cutoff, coeffs=v.reshape(shape), is_real=False),
    )


def invariance_residual(
    jet: models.ManifoldJet,
    system: PreparedSystem,
    radius: float,
    samples: int = 16,
    seed: int = 0,
    step: float = 0.05,
    space: models.SpaceParams = models.SpaceParams(rho=0.0, r=1.0),
) -> float:
    """Largest ||c(h) - w(theta_0 + omega h, z(h))||_X / h over seeded samples.

    Each sample starts on the graph at a random theta_0 and a random z of norm
    `radius` and follows the truncated prepared system for the time h = step.
    """
    if radius > system.cutoff_fn.radius / 2.0:
        raise errors.ParameterNumberRangeError("radius", 0.0, system.cutoff_fn.radius / 2.0, radius)
    rng = np.random.default_rng(seed)
    n_c, n_h = system.n_center, len(system.hyperbolic)
    omega = np.asarray(system.spec.omega)
    largest = 0.0
    for _ in range(samples):
        theta0 = rng.uniform(0.0, 2.0 * np.pi, system.freq_dim)
        direction = rng.standard_normal(n_c)
        z = radius * direction / np.linalg.norm(direction) if n_c else direction
        c = jet.evaluate(theta0, z)
        solution = scipy.integrate.solve_ivp(
            prepared_rhs(system, theta0),
            (0.0, step),
            np.concatenate([z, c.real, c.imag]),
            method="DOP853",
            rtol=ODE_RTOL,
            atol=ODE_ATOL,
        )
        end = solution.y[:, -1]
        z_end = end[:n_c]
        c_end = end[n_c : n_c + n_h] + 1j * end[n_c + n_h :]
        defect = c_end - jet.evaluate(theta0 + omega * step, z_end)
        largest = max(largest, _defect_state(system, defect).norm(space) / step)
    log.debug(f"{radius=}, residual={largest:.3e}")
    return largest


class InvarianceSample(typing.NamedTuple):
    radius: float
    residual: float


def invariance_sweep(
    jet: models.ManifoldJet,
    system: PreparedSystem,
    radii: typing.Sequence[float],
    samples: int = 16,
    seed: int = 0,
    step: float = 0.05,
    show_progress: bool = False,
    space: models.SpaceParams = models.SpaceParams(rho=0.0, r=1.0),
) -> list[InvarianceSample]:
    """Invariance residuals over radii, measured in H^{rho,r} x H^{rho,r-1} of `space`."""
    return [
        InvarianceSample(
            radius, invariance_residual(jet, system, radius, samples, seed, step, space)
        )
        for radius in tqdm.tqdm(radii, desc="invariance radii", disable=not show_progress)
    ]
