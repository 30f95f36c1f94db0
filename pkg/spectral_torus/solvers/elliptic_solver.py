"""Fixed-point solver for L u = eps F(u) in the nonresonant case and for the
response problem Q U = eps N(U) of the ill-posed evolution equation.

Both iterate T(u) = eps L^{-1} F(u) from u_0 = 0 inside the ball B_s(0) of
H^{rho,r}, with the smallness threshold

    eps_* = min(1 / (2 C Lip(F)), s / (2 C ||F(0)||_{rho,r-2}))

where C bounds ||L^{-1}||_{r-2 -> r} over the truncation box.
"""

import numpy as np
import tqdm

from spectral_torus import errors
from spectral_torus.models import models
from spectral_torus.operators import linear_ops
from spectral_torus.solvers import fixed_point
from spectral_torus.spectral import expressions
from spectral_torus.spectral import space as spectral_space
from spectral_torus.utils import logger
from spectral_torus.utils import random_fields

log = logger.setup_logger(__name__)

DERIVATIVE_LOSS = 2.0


def _freq_dim(spec: models.OperatorSpec) -> int:
    return spec.freq_dim if isinstance(spec, models.EvolutionOperatorSpec) else 0


def _zero_field(spec: models.OperatorSpec, cutoff: int) -> models.SpectralField:
    freq_dim = _freq_dim(spec)
    if freq_dim:
        return models.EvolutionField.zeros(spec.dim, cutoff, freq_dim=freq_dim)
    return models.SpectralField.zeros(spec.dim, cutoff)


def _require_space(spec: models.OperatorSpec, space: models.SpaceParams) -> None:
    # the product weight needs the algebra property in theta and in x separately
    space.require_algebra(max(spec.dim, _freq_dim(spec)), loss=DERIVATIVE_LOSS)


def inverse_gain_constant(
    spec: models.OperatorSpec, space: models.SpaceParams, cutoff: int
) -> float:
    """C = max_k (w_r(k) / w_{r-2}(k))^{1/2} / |Upsilon_k| over the box.

    For elliptic fields this is max (1 + |k|^2) / |Upsilon_k|. Raises
    SingularMultiplierError if a multiplier vanishes.
    """
    template = _zero_field(spec, cutoff)
    values = linear_ops.multipliers(spec, cutoff)
    mask = np.abs(values) <= linear_ops.kernel_tolerance(cutoff, values.ndim)
    if mask.any():
        position = tuple(int(i) for i in np.argwhere(mask)[0])
        raise errors.SingularMultiplierError(
            mode=tuple(i - cutoff for i in position),
            multiplier=float(values[position]),
            tolerance=float(linear_ops.kernel_tolerance(cutoff, values.ndim)[position]),
        )
    gain = np.sqrt(
        spectral_space.weights(template, space)
        / spectral_space.weights(template, space.lowered(DERIVATIVE_LOSS))
    )
    return float(np.max(gain / np.abs(values)))


def lipschitz_estimate(
    f: expressions.ScalarFunctionSpec,
    spec: models.OperatorSpec,
    space: models.SpaceParams,
    ball_radius: float,
    cutoff: int,
    samples: int = 64,
    seed: int = 0,
) -> float:
    """Largest sampled quotient ||F(u1) - F(u2)||_{r-2} / ||u1 - u2||_r over
    seeded random pairs in B_s(0)."""
    rng = np.random.default_rng(seed)
    lowered = space.lowered(DERIVATIVE_LOSS)
    freq_dim = _freq_dim(spec)
    best = 0.0
    for _ in range(samples):
        u1 = random_fields.random_ball_point(rng, spec.dim, cutoff, space, ball_radius, freq_dim)
        u2 = random_fields.random_ball_point(rng, spec.dim, cutoff, space, ball_radius, freq_dim)
        distance = spectral_space.norm(u1 - u2, space)
        if distance == 0.0:
            continue
        difference = spectral_space.apply_nonlinearity(f, u1) - spectral_space.apply_nonlinearity(f, u2)
        best = max(best, spectral_space.norm(difference, lowered) / distance)
    return best


def epsilon_star(
    spec: models.OperatorSpec,
    f: expressions.ScalarFunctionSpec,
    s: float,
    space: models.SpaceParams,
    cutoff: int = 32,
    lip_samples: int = 64,
    seed: int = 0,
) -> float:
    """The smallness threshold eps_*; infinite when both branches of the min are.

    Raises:
        ResonantSpecError: the operator has a kernel in the box.
    """
    report = linear_ops.resonance_scan(spec, 0.0, kmax=cutoff)
    if report.classification == models.ResonanceClassification.RESONANT:
        raise errors.ResonantSpecError(report.kernel_modes, report.classification.value)
    gain = inverse_gain_constant(spec, space, cutoff)
    lipschitz = lipschitz_estimate(f, spec, space, s, cutoff, lip_samples, seed)
    forcing = spectral_space.norm(
        spectral_space.apply_nonlinearity(f, _zero_field(spec, cutoff)),
        space.lowered(DERIVATIVE_LOSS),
    )
    first = 1.0 / (2.0 * gain * lipschitz) if lipschitz > 0.0 else np.inf
    second = s / (2.0 * gain * forcing) if forcing > 0.0 else np.inf
    log.debug(f"{gain=}, {lipschitz=}, {forcing=}, {first=}, {second=}")
    return float(min(first, second))


def residual(
    spec: models.OperatorSpec,
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    epsilon: float,
    space: models.SpaceParams,
) -> float:
    """||L u - eps F(u)||_{rho,r-2}."""
    defect = linear_ops.apply(spec, u) - epsilon * spectral_space.apply_nonlinearity(f, u)
    return spectral_space.norm(defect, space.lowered(DERIVATIVE_LOSS))


def _picard(
    spec: models.OperatorSpec,
    f: expressions.ScalarFunctionSpec,
    cfg: models.SolveConfig,
    start: models.SpectralField,
) -> fixed_point.PicardOutcome:
    def step(u: models.SpectralField) -> models.SpectralField:
        forcing = spectral_space.apply_nonlinearity(f, u)
        return cfg.epsilon * linear_ops.apply_inverse(spec, forcing)

    return fixed_point.picard_iterate(
        step,
        start,
        norm=lambda u: spectral_space.norm(u, cfg.space),
        ball_radius=cfg.ball_radius,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )


def _solve(
    spec: models.OperatorSpec, f: expressions.ScalarFunctionSpec, cfg: models.SolveConfig
) -> models.SolveResult:
    threshold = epsilon_star(
        spec, f, cfg.ball_radius, cfg.space, cfg.cutoff, cfg.lip_samples, cfg.seed
    )
    outside = cfg.epsilon > threshold
    if outside:
        log.warning(
            f"epsilon={cfg.epsilon} exceeds epsilon_star={threshold:.3e}; proceeding outside the certified regime"
        )
    outcome = _picard(spec, f, cfg, _zero_field(spec, cfg.cutoff))
    return models.SolveResult(
        solution=outcome.solution,
        residual=residual(spec, f, outcome.solution, cfg.epsilon, cfg.space),
        iterations=outcome.iterations,
        contraction_estimate=outcome.contraction_estimate,
        epsilon_star=threshold,
        outside_certified_regime=outside,
        step_history=outcome.step_history,
    )


def solve_elliptic(
    spec: models.EllipticOperatorSpec,
    f: expressions.ScalarFunctionSpec,
    cfg: models.SolveConfig,
) -> models.SolveResult:
    """Solves L_{nu,m} u = eps F(u) in B_s(0) by Picard iteration from 0.

    Raises:
        SpaceParamsError: r - 2 <= d/2.
        ResonantSpecError: the operator has a kernel in the truncation box.
        DivergenceError: the iteration diverged, left the ball or hit max_iter.
    """
    if isinstance(spec, models.EvolutionOperatorSpec):
        return solve_evolution(spec, f, cfg)
    _require_space(spec, cfg.space)
    return _solve(spec, f, cfg)


def solve_evolution(
    spec: models.EvolutionOperatorSpec,
    f: expressions.ScalarFunctionSpec,
    cfg: models.SolveConfig,
) -> models.SolveResult:
    """Solves Q_{omega,nu,m} U = eps N(U) for the hull function U(theta, x).

    Only evolution-H1 and evolution-H2 operators are handled here.

    Raises:
        SpaceParamsError: r - 2 <= max(b, d)/2.
        ResonantSpecError: some Upsilon_{l,k} vanishes in the box.
        EvolutionCenterRouteError: the operator is classified evolution-center.
    """
    _require_space(spec, cfg.space)
    report = linear_ops.resonance_scan(spec, 0.0, kmax=cfg.cutoff)
    log.info(f"evolution operator classified as {report.classification.value}")
    if report.classification == models.ResonanceClassification.RESONANT:
        raise errors.ResonantSpecError(report.kernel_modes, report.classification.value)
    if report.classification == models.ResonanceClassification.EVOLUTION_CENTER:
        raise errors.EvolutionCenterRouteError(report.classification.value)
    return _solve(spec, f, cfg)


def probe_uniqueness(
    spec: models.OperatorSpec,
    f: expressions.ScalarFunctionSpec,
    cfg: models.SolveConfig,
    reference: models.SpectralField,
    starts: int = 20,
    show_progress: bool = False,
) -> float:
    """Restarts the iteration from seeded random points of B_s(0) and returns
    the largest distance of the limits from `reference`."""
    rng = np.random.default_rng(cfg.seed)
    freq_dim = _freq_dim(spec)
    largest = 0.0
    for _ in tqdm.tqdm(range(starts), desc="uniqueness probe", disable=not show_progress):
        start = random_fields.random_ball_point(
            rng, spec.dim, cfg.cutoff, cfg.space, cfg.ball_radius, freq_dim
        )
        outcome = _picard(spec, f, cfg, start)
        largest = max(largest, spectral_space.norm(outcome.solution - reference, cfg.space))
    return largest


def strong_form_residual(
    spec: models.OperatorSpec,
    f: expressions.ScalarFunctionSpec,
    u: models.SpectralField,
    epsilon: float,
    grid_factor: int = 2,
) -> float:
    """max over a grid of |L u - eps f(x, u, Du, D^2u)| with f applied pointwise."""
    n = grid_factor * spectral_space.collocation_size(f, u.cutoff)
    linear_part = spectral_space.to_grid(linear_ops.apply(spec, u), n)
    nonlinear_part = spectral_space.nonlinearity_on_grid(f, u, n)
    return float(np.max(np.abs(linear_part - epsilon * nonlinear_part)))


def first_order_response(
    spec: models.OperatorSpec, f: expressions.ScalarFunctionSpec, cutoff: int
) -> models.SpectralField:
    """L^{-1} F(0), the derivative of the solution in eps at eps = 0."""
    return linear_ops.apply_inverse(
        spec, spectral_space.apply_nonlinearity(f, _zero_field(spec, cutoff))
    )

