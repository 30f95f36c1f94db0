"""Lyapunov-Schmidt treatment of the resonant problem for d = 1, 2.

The unknown is the rescaled v = eps u of the truncated system

    G(v) = L_{nu,m0} v + eps_m v - F(v) = 0,       F(v) = v^2 by default,

split as v = vbar + vhat with vbar = sum_j alpha_j e^{i k^j.x} on the kernel
and vhat on the range. The range equation

    vhat = L_R^{-1}(-eps_m vhat + Pi_R (vhat + vbar)^2)

is a contraction for small alpha, and the kernel equation reduces at cubic
order to eps_m alpha_1 = alpha_1 (A |alpha_1|^2 + B |alpha_2|^2) (d = 2) or
eps_m alpha_1 = M alpha_1 |alpha_1|^2 (d = 1).
"""

import itertools
import typing

import numpy as np
import scipy.sparse.linalg
import sympy
import tqdm

from spectral_torus import errors
from spectral_torus.config import config
from spectral_torus.models import models
from spectral_torus.operators import linear_ops
from spectral_torus.solvers import fixed_point
from spectral_torus.spectral import expressions
from spectral_torus.spectral import space as spectral_space
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

SQUARE = expressions.ScalarFunctionSpec(expression="u**2")
COEFFICIENT_TOLERANCE = 1e-10
_PLAIN = models.SpaceParams(rho=0.0, r=0.0)


def kernel_basis(
    nu: typing.Sequence[float], m0: float, kmax: int = 64
) -> models.KernelBasis:
    """Kernel of L_{nu,m0} in the box, ordered so that modes j and 2^d - 1 - j
    are opposite.

    Raises:
        UnsupportedDimensionError: d >= 3.
        NotResonantError: the kernel is empty.
        KernelNotSimpleError: the kernel is not the sign-flip orbit of one
            vector with nonzero entries.
    """
    nu = tuple(float(nu_i) for nu_i in nu)
    if len(nu) not in (1, 2):
        raise errors.UnsupportedDimensionError(len(nu))
    report = linear_ops.resonance_scan(models.EllipticOperatorSpec(nu=nu, m=m0), 0.0, kmax)
    if not report.kernel_modes:
        raise errors.NotResonantError(nu, m0)
    orbits = sorted({tuple(abs(ki) for ki in k) for k in report.kernel_modes})
    if len(orbits) > 1:
        raise errors.KernelNotSimpleError(report.kernel_modes, f"{len(orbits)} sign-flip orbits")
    base = orbits[0]
    if any(ki == 0 for ki in base):
        raise errors.KernelNotSimpleError(report.kernel_modes, "a component is zero")
    modes = [
        tuple(sign * ki for sign, ki in zip(signs, base))
        for signs in itertools.product((1, -1), repeat=len(base))
    ]
    log.info(f"kernel base vector {base}, {len(modes)} modes")
    return models.KernelBasis(nu=nu, m0=m0, base_vector=base, modes=modes)


def _kernel_mask(basis: models.KernelBasis, u: models.SpectralField) -> np.ndarray:
    mask = np.zeros(u.coeffs.shape, dtype=bool)
    for k in basis.modes:
        if all(abs(ki) <= u.cutoff for ki in k):
            mask[tuple(ki + u.cutoff for ki in k)] = True
    return mask


def project_kernel(basis: models.KernelBasis, u: models.SpectralField) -> models.SpectralField:
    return u.with_coeffs(np.where(_kernel_mask(basis, u), u.coeffs, 0.0))


def project_range(basis: models.KernelBasis, u: models.SpectralField) -> models.SpectralField:
    return u.with_coeffs(np.where(_kernel_mask(basis, u), 0.0, u.coeffs))


def range_inverse(basis: models.KernelBasis, u: models.SpectralField) -> models.SpectralField:
    """(L^R)^{-1} Pi_R u."""
    inverse = linear_ops.apply_inverse(basis.spec(), project_range(basis, u), exclude_kernel=True)
    return project_range(basis, inverse)


def _check_cutoff(basis: models.KernelBasis, cutoff: int) -> None:
    needed = 2 * max(basis.base_vector)
    if cutoff < needed:
        raise errors.ParameterNumberRangeError("cutoff", needed, np.inf, cutoff)


def kernel_field(
    basis: models.KernelBasis, alpha: typing.Sequence[complex], cutoff: int
) -> models.SpectralField:
    """vbar = sum_j alpha_j e^{i k^j.x}; real when alpha is reality-paired."""
    if len(alpha) != len(basis.modes):
        raise errors.DimensionMismatchError(len(basis.modes), len(alpha), "alpha length")
    is_real = all(
        np.isclose(alpha[basis.partner(j)], np.conj(alpha[j]), rtol=0.0, atol=1e-15)
        for j in range(len(alpha))
    )
    return models.SpectralField.from_modes(
        basis.dim, cutoff, dict(zip(basis.modes, alpha)), is_real=is_real
    )


def range_quadratic_jet(
    basis: models.KernelBasis, alpha: typing.Sequence[complex], cutoff: int
) -> models.SpectralField:
    """Second-order range solution (L^R)^{-1} Pi_R vbar^2."""
    vbar = kernel_field(basis, alpha, cutoff)
    return range_inverse(basis, spectral_space.multiply(vbar, vbar))


def solve_range(
    basis: models.KernelBasis,
    alpha: typing.Sequence[complex],
    eps_m: float,
    cutoff: int = 32,
    tol: float = 1e-15,
    max_iter: int = 200,
) -> models.SpectralField:
    """Fixed point of the range equation for given kernel amplitudes.

    The contraction is certified in the coefficient l1 norm (an algebra norm
    with constant 1): on the ball of radius R = 2 ||T(0)||_1 the Lipschitz
    constant is at most (|eps_m| + 2 (||vbar||_1 + R)) / delta_R, delta_R the
    smallest range multiplier.

    Raises:
        AlphaTooLargeError: that bound is not below 1/2.
    """
    _check_cutoff(basis, cutoff)
    vbar = kernel_field(basis, alpha, cutoff)
    values = np.abs(linear_ops.multipliers(basis.spec(), cutoff))
    delta_range = float(np.min(values[~_kernel_mask(basis, vbar)]))
    first = range_inverse(basis, spectral_space.multiply(vbar, vbar))
    alpha_size = spectral_space.coefficient_sum(vbar)
    ball = 2.0 * spectral_space.coefficient_sum(first)
    bound = (abs(eps_m) + 2.0 * (alpha_size + ball)) / delta_range
    if bound >= 0.5:
        raise errors.AlphaTooLargeError(alpha_size, bound)

    def step(vhat: models.SpectralField) -> models.SpectralField:
        total = vhat + vbar
        return range_inverse(basis, spectral_space.multiply(total, total) - eps_m * vhat)

    outcome = fixed_point.picard_iterate(
        step,
        models.SpectralField.zeros(basis.dim, cutoff, is_real=vbar.is_real),
        norm=spectral_space.coefficient_sum,
        ball_radius=max(ball, np.finfo(float).tiny),
        tol=tol,
        max_iter=max_iter,
    )
    return outcome.solution


def _eigenvalue(basis: models.KernelBasis, k: models.WaveVector) -> float:
    value = linear_ops.eigenvalue(k, basis.spec())
    if abs(value) <= linear_ops.DEFAULT_RELATIVE_TOLERANCE * (1.0 + sum(abs(ki) for ki in k) ** 2):
        raise errors.DegenerateBifurcationError(
            f"the eigenvalue at the combined mode {k} vanishes"
        )
    return value


def bifurcation_coefficients(basis: models.KernelBasis) -> models.BifurcationData:
    """Closed-form cubic coefficients of the bifurcation equation for F = v^2.

    d = 2, base (a, b):
        A = 2/Upsilon_(2a,2b) + 4/Upsilon_0
        B = 4/Upsilon_(2a,0) + 4/Upsilon_(0,2b) + 4/Upsilon_0
        M = [[A, B], [B, A]], sigma = sign(A + B)
    d = 1, base a:
        M = 2 (1/Upsilon_2a + 2/Upsilon_0) = 10/(3 m0)
    """
    zero = (0,) * basis.dim
    if basis.dim == 1:
        (a,) = basis.base_vector
        M = 2.0 * (1.0 / _eigenvalue(basis, (2 * a,)) + 2.0 / _eigenvalue(basis, zero))
        if M == 0.0:
            raise errors.DegenerateBifurcationError("M = 0")
        return models.BifurcationData(
            dim=1,
            A=M,
            M=[[M]],
            sigma=int(np.sign(M)),
            determinant=M,
            printed_M=5.0 / (3.0 * basis.m0),
        )
    if basis.dim != 2:
        raise errors.UnsupportedDimensionError(basis.dim)
    a, b = basis.base_vector
    upsilon_0 = _eigenvalue(basis, zero)
    A = 2.0 / _eigenvalue(basis, (2 * a, 2 * b)) + 4.0 / upsilon_0
    B = (
        4.0 / _eigenvalue(basis, (2 * a, 0))
        + 4.0 / _eigenvalue(basis, (0, 2 * b))
        + 4.0 / upsilon_0
    )
    determinant = (A + B) * (A - B)
    if determinant == 0.0:
        raise errors.DegenerateBifurcationError(f"det M = 0 ({A=}, {B=})")
    return models.BifurcationData(
        dim=2,
        A=A,
        B=B,
        M=[[A, B], [B, A]],
        sigma=int(np.sign(A + B)),
        determinant=determinant,
    )


def _leading_z(data: models.BifurcationData, eps_m: float) -> float:
    if data.dim == 1:
        return eps_m / data.A
    return eps_m / (data.A + data.B)


def leading_amplitudes(
    data: models.BifurcationData,
    basis: models.KernelBasis,
    eps_m: float,
    phase: typing.Sequence[float] | None = None,
) -> np.ndarray:
    """alpha_j = sqrt(z) e^{i k^j.x*} with z = eps_m M^{-1} I (all components equal).

    Raises:
        BranchDoesNotExistError: sign(eps_m) != sigma.
    """
    if eps_m == 0.0:
        return np.zeros(len(basis.modes), dtype=np.complex128)
    if int(np.sign(eps_m)) != data.sigma:
        raise errors.BranchDoesNotExistError(eps_m, data.sigma)
    phase = np.zeros(basis.dim) if phase is None else np.asarray(phase, dtype=float)
    if phase.shape != (basis.dim,):
        raise errors.DimensionMismatchError(basis.dim, phase.shape, "phase")
    root = np.sqrt(_leading_z(data, eps_m))
    return np.array([root * np.exp(1j * np.dot(k, phase)) for k in basis.modes])


def _even_projector(u: np.ndarray) -> np.ndarray:
    total = np.zeros_like(u)
    axes = range(u.ndim)
    for count in range(u.ndim + 1):
        for flipped in itertools.combinations(axes, count):
            total = total + (np.flip(u, axis=flipped) if flipped else u)
    return total / 2**u.ndim


def _branch_residual(
    basis: models.KernelBasis,
    f: expressions.ScalarFunctionSpec,
    eps_m: float,
    v: models.SpectralField,
) -> models.SpectralField:
    return (
        linear_ops.apply(basis.spec(), v)
        + eps_m * v
        - spectral_space.apply_nonlinearity(f, v)
    )


def branch_residual(
    basis: models.KernelBasis,
    eps_m: float,
    v: models.SpectralField,
    f: expressions.ScalarFunctionSpec = SQUARE,
) -> float:
    """Coefficient l2 norm of L v + eps_m v - F(v)."""
    return spectral_space.norm(_branch_residual(basis, f, eps_m, v), _PLAIN)


def newton_refine(
    basis: models.KernelBasis,
    eps_m: float,
    seed: models.SpectralField,
    cfg: config.NewtonConfig = config.NewtonConfig(),
    f: expressions.ScalarFunctionSpec = SQUARE,
    symmetric: bool | None = None,
) -> models.BranchSolution:
    """Newton's method with backtracking on G(v) = L v + eps_m v - F(v).

    The linear systems are solved by GMRES with the diagonal preconditioner
    1/(Upsilon_k + eps_m - c_0), c_0 the mean of F'(v). With `symmetric` the
    iteration stays in the fields even in every coordinate, where the branch
    is isolated.

    Raises:
        NewtonStagnationError: no progress over cfg.stagnation_window steps or
            cfg.max_iter reached.
        BranchCollapseError: the limit is the zero solution.
    """
    symmetric = cfg.symmetric if symmetric is None else symmetric
    spec = basis.spec()
    shape = seed.coeffs.shape
    size = int(np.prod(shape))
    projector = _even_projector if symmetric else (lambda array: array)
    shifted = linear_ops.multipliers(spec, seed.cutoff) + eps_m
    one = models.SpectralField.from_modes(basis.dim, seed.cutoff, {(0,) * basis.dim: 1.0})

    v = seed.with_coeffs(projector(seed.coeffs))
    current = _branch_residual(basis, f, eps_m, v)
    norm = spectral_space.norm(current, _PLAIN)
    history = [norm]
    iteration = 0
    while norm > cfg.tol:
        iteration += 1
        if iteration > cfg.max_iter:
            raise errors.NewtonStagnationError(iteration - 1, norm)
        slope = spectral_space.apply_derivative(f, v, one).coefficient((0,) * basis.dim).real
        diagonal = shifted - slope
        diagonal = np.where(np.abs(diagonal) > 1e-12, diagonal, 1.0)
        template = v.with_coeffs(np.zeros(shape), is_real=False)

        def jacobian(x: np.ndarray) -> np.ndarray:
            h = projector(x.reshape(shape))
            direction = template.with_coeffs(h)
            image = shifted * h - spectral_space.apply_derivative(f, v, direction).coeffs
            return (projector(image) + x.reshape(shape) - h).ravel()

        operator = scipy.sparse.linalg.LinearOperator(
            (size, size), matvec=jacobian, dtype=np.complex128
        )
        preconditioner = scipy.sparse.linalg.LinearOperator(
            (size, size), matvec=lambda x: (x.reshape(shape) / diagonal).ravel(), dtype=np.complex128
        )
        rhs = -projector(current.coeffs).ravel()
        update, info = scipy.sparse.linalg.gmres(
            operator,
            rhs,
            rtol=cfg.gmres_rtol,
            restart=cfg.gmres_restart,
            maxiter=cfg.gmres_maxiter,
            M=preconditioner,
        )
        if info < 0:
            raise errors.NewtonStagnationError(iteration, norm)
        update = projector(update.reshape(shape))

        step = 1.0
        while True:
            candidate = v.with_coeffs(v.coeffs + step * update)
            if candidate.is_real:
                candidate = candidate.realified()
            candidate_residual = _branch_residual(basis, f, eps_m, candidate)
            candidate_norm = spectral_space.norm(candidate_residual, _PLAIN)
            if candidate_norm <= (1.0 - 1e-4 * step) * norm or step < 1e-4:
                break
            step /= 2.0
        v, current, norm = candidate, candidate_residual, candidate_norm
        history.append(norm)
        log.debug(f"{iteration=}, residual={norm:.3e}, {step=}")
        window = cfg.stagnation_window
        if len(history) > window and history[-1] >= 0.5 * history[-1 - window]:
            raise errors.NewtonStagnationError(iteration, norm)

    size_v = spectral_space.norm(v, _PLAIN)
    if size_v < 10.0 * cfg.tol:
        raise errors.BranchCollapseError(eps_m, size_v)
    return models.BranchSolution(
        eps_m=eps_m,
        field=v,
        residual=norm,
        iterations=iteration,
        phase=(0.0,) * basis.dim,
        z_measured=measured_z(basis, v),
    )


def measured_z(basis: models.KernelBasis, v: models.SpectralField) -> list[float]:
    """|alpha_j|^2 for the independent kernel modes (one per opposite pair)."""
    half = len(basis.modes) // 2
    return [abs(v.coefficient(k)) ** 2 for k in basis.modes[:half]]


def branch_solve(
    basis: models.KernelBasis,
    eps_m: float,
    phase: typing.Sequence[float] | None = None,
    cfg: config.NewtonConfig = config.NewtonConfig(),
    f: expressions.ScalarFunctionSpec = SQUARE,
    data: models.BifurcationData | None = None,
) -> models.BranchSolution:
    """Nonzero solution of the truncated resonant problem at eps_m.

    Seeds Newton's method with vbar(alpha) + vhat(alpha) and returns the member
    of the translation family v(x + x*) selected by `phase` = x*.
    """
    _check_cutoff(basis, cfg.cutoff)
    data = data or bifurcation_coefficients(basis)
    phase = (0.0,) * basis.dim if phase is None else tuple(float(p) for p in phase)
    seed_phase = None if cfg.symmetric else phase
    alpha = leading_amplitudes(data, basis, eps_m, seed_phase)
    seed = kernel_field(basis, alpha, cfg.cutoff) + solve_range(basis, alpha, eps_m, cfg.cutoff)
    solution = newton_refine(basis, eps_m, seed, cfg, f)
    field = solution.field
    if cfg.symmetric and any(phase):
        field = spectral_space.translate(field, phase).realified()
    log.info(
        f"branch at {eps_m=:.3e}: residual={solution.residual:.3e}, iterations={solution.iterations}"
    )
    return models.BranchSolution(
        eps_m=eps_m,
        field=field,
        residual=branch_residual(basis, eps_m, field, f),
        iterations=solution.iterations,
        phase=phase,
        z_measured=measured_z(basis, field),
    )


class OppositeSideProbe(typing.NamedTuple):
    seeds: int
    collapsed: int
    final_norms: list[float]


def probe_opposite_side(
    basis: models.KernelBasis,
    eps_m: float,
    seeds: int = 10,
    seed: int = 0,
    cfg: config.NewtonConfig = config.NewtonConfig(),
    data: models.BifurcationData | None = None,
    show_progress: bool = False,
) -> OppositeSideProbe:
    """Runs Newton's method on the side sign(eps_m) = -sigma and counts how many
    runs collapse to zero.

    Each start is the leading branch ansatz with the sign of z flipped: equal
    |alpha_j| = sqrt(|z|) times a random factor in [0.5, 1.5], translated by a
    random phase. Newton's method commutes with translations, so the runs stay
    in the family where z_1 = z_2.
    """
    data = data or bifurcation_coefficients(basis)
    if int(np.sign(eps_m)) == data.sigma:
        raise errors.ParameterNumberRangeError("eps_m * sigma", -np.inf, 0.0, eps_m * data.sigma)
    rng = np.random.default_rng(seed)
    scale = np.sqrt(abs(_leading_z(data, eps_m)))
    modes = np.array(basis.modes, dtype=float)
    collapsed = 0
    final_norms = []
    free = cfg.model_copy(update={"symmetric": False})
    for _ in tqdm.tqdm(range(seeds), desc="opposite side", disable=not show_progress):
        phase = rng.uniform(0.0, 2.0 * np.pi, basis.dim)
        alpha = scale * rng.uniform(0.5, 1.5) * np.exp(1j * (modes @ phase))
        start = kernel_field(basis, alpha, cfg.cutoff)
        try:
            solution = newton_refine(basis, eps_m, start, free, symmetric=False)
            final_norms.append(spectral_space.norm(solution.field, _PLAIN))
        except errors.BranchCollapseError as exc:
            collapsed += 1
            final_norms.append(0.0)
            log.debug(f"collapse: {exc}")
        except errors.NewtonStagnationError as exc:
            final_norms.append(float("nan"))
            log.warning(f"Newton's method stagnated on the opposite side: {exc}")
    return OppositeSideProbe(seeds=seeds, collapsed=collapsed, final_norms=final_norms)


def _poly_field_square(
    left: dict[models.WaveVector, sympy.Poly], right: dict[models.WaveVector, sympy.Poly]
) -> dict[models.WaveVector, sympy.Poly]:
    product: dict[models.WaveVector, sympy.Poly] = {}
    for k, p in left.items():
        for q_k, q in right.items():
            mode = tuple(a + b for a, b in zip(k, q_k))
            product[mode] = product[mode] + p * q if mode in product else p * q
    return product


def _poly_range_inverse(
    basis: models.KernelBasis, field: dict[models.WaveVector, sympy.Poly]
) -> dict[models.WaveVector, sympy.Poly]:
    kernel = set(basis.modes)
    spec = basis.spec()
    return {
        k: p * sympy.Float(1.0 / linear_ops.eigenvalue(k, spec), 30)
        for k, p in field.items()
        if k not in kernel
    }


def _add(
    left: dict[models.WaveVector, sympy.Poly], right: dict[models.WaveVector, sympy.Poly]
) -> dict[models.WaveVector, sympy.Poly]:
    total = dict(left)
    for k, p in right.items():
        total[k] = total[k] + p if k in total else p
    return total


def bifurcation_map_expansion(
    basis: models.KernelBasis,
) -> tuple[list[sympy.Symbol], list[sympy.Poly]]:
    """Components of Pi_K (vbar + vhat)^2 up to degree 4 in the amplitudes,
    with vhat = vhat_2 + vhat_3 expanded from the range equation at eps = 0:

        vhat_2 = L_R^{-1} Pi_R vbar^2,  vhat_3 = L_R^{-1} Pi_R (2 vbar vhat_2)

    Degree 3 is 2 vbar vhat_2 and degree 4 is 2 vbar vhat_3 + vhat_2^2.
    """
    symbols = list(sympy.symbols(f"alpha1:{len(basis.modes) + 1}"))
    vbar = {k: sympy.Poly(symbol, *symbols) for k, symbol in zip(basis.modes, symbols)}
    vhat_2 = _poly_range_inverse(basis, _poly_field_square(vbar, vbar))
    twice_vbar = {k: 2 * p for k, p in vbar.items()}
    vhat_3 = _poly_range_inverse(basis, _poly_field_square(twice_vbar, vhat_2))
    square = _add(
        _add(_poly_field_square(vbar, vbar), _poly_field_square(twice_vbar, vhat_2)),
        _add(_poly_field_square(twice_vbar, vhat_3), _poly_field_square(vhat_2, vhat_2)),
    )
    zero = sympy.Poly(0, *symbols)
    components = [square.get(k, zero) for k in basis.modes]
    return symbols, components


def _coefficient(poly: sympy.Poly, exponents: tuple[int, ...]) -> float:
    return float(poly.as_dict().get(exponents, 0.0))


def branch_verify(
    basis: models.KernelBasis,
    eps_m: float,
    branch: models.BranchSolution | None = None,
) -> models.BranchVerificationReport:
    """Checks the structure of the bifurcation map against the closed forms.

    - every even-degree coefficient vanishes
    - component j is alpha_j times a series in the products alpha_p alpha_{p'}
      of opposite modes
    - the cubic coefficients equal A, B (d = 2) or M (d = 1)
    """
    symbols, components = bifurcation_map_expansion(basis)
    data = bifurcation_coefficients(basis)
    n = len(symbols)
    max_even = 0.0
    max_violation = 0.0
    for j, component in enumerate(components):
        for exponents, value in component.as_dict().items():
            value = abs(complex(value))
            if sum(exponents) % 2 == 0:
                max_even = max(max_even, value)
                continue
            quotient = list(exponents)
            quotient[j] -= 1
            paired = quotient[j] >= 0 and all(
                quotient[p] == quotient[basis.partner(p)] for p in range(n)
            )
            if not paired:
                max_violation = max(max_violation, value)

    first = components[0]
    if basis.dim == 1:
        extracted = {"M": _coefficient(first, (2, 1))}
        formula = {"M": data.A}
    else:
        extracted = {
            "A": _coefficient(first, (2, 0, 0, 1)),
            "B": _coefficient(first, (1, 1, 1, 0)),
        }
        formula = {"A": data.A, "B": data.B}
    matches = all(
        abs(extracted[name] - formula[name]) <= COEFFICIENT_TOLERANCE * max(1.0, abs(formula[name]))
        for name in formula
    )
    printed_discrepancy = data.printed_M is not None and abs(
        extracted["M"] - data.printed_M
    ) > COEFFICIENT_TOLERANCE * max(1.0, abs(data.printed_M))
    predicted_z = _leading_z(data, eps_m)
    measured = branch.z_measured[0] if branch is not None else None
    return models.BranchVerificationReport(
        dim=basis.dim,
        max_even_coefficient=max_even,
        max_factorization_violation=max_violation,
        extracted=extracted,
        formula=formula,
        matches_formula=matches,
        printed_M=data.printed_M,
        printed_discrepancy=printed_discrepancy,
        eps_m=eps_m,
        predicted_z=predicted_z,
        measured_z=measured,
    )


class SweepRow(typing.NamedTuple):
    eps_m: float
    z1: float
    z2: float
    branch_norm: float
    residual: float
    sigma: int
    A: float
    B: float
    exists: bool


def branch_sweep(
    basis: models.KernelBasis,
    eps_values: typing.Sequence[float],
    phase: typing.Sequence[float] | None = None,
    cfg: config.NewtonConfig = config.NewtonConfig(),
    show_progress: bool = False,
) -> tuple[models.BifurcationData, list[SweepRow]]:
    """One branch per eps_m; values on the wrong side give rows with exists=False."""
    data = bifurcation_coefficients(basis)
    rows = []
    branches = []
    for eps_m in tqdm.tqdm(eps_values, desc="branches", disable=not show_progress):
        B = data.B if data.B is not None else float("nan")
        try:
            branch = branch_solve(basis, eps_m, phase, cfg, data=data)
        except errors.BranchDoesNotExistError:
            log.info(f"no branch at {eps_m=} (sigma={data.sigma})")
            rows.append(SweepRow(eps_m, 0.0, 0.0, 0.0, 0.0, data.sigma, data.A, B, False))
            continue
        branches.append(branch)
        z = branch.z_measured + [float("nan")] * (2 - len(branch.z_measured))
        rows.append(
            SweepRow(
                eps_m,
                z[0],
                z[1],
                spectral_space.norm(branch.field, _PLAIN),
                branch.residual,
                data.sigma,
                data.A,
                B,
                True,
            )
        )
    leading = [_leading_z(data, eps) for eps in eps_values if int(np.sign(eps)) == data.sigma]
    data = data.model_copy(update={"branches": branches, "leading_z": leading})
    return data, rows
