import typing


class SpectralTorusError(Exception):
    """Base class of all library errors. `exit_code` is what the CLI returns."""

    exit_code: typing.ClassVar[int] = 1


# exit code 2: invalid input or configuration


class ValidationError(SpectralTorusError):
    exit_code = 2


class ExperimentValidationError(ValidationError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        listing = "\n".join(f"  - {violation}" for violation in violations)
        super().__init__(
            f"The experiment config violates {len(violations)} constraint(s):\n{listing}"
        )


class ParameterNumberRangeError(ValidationError):
    def __init__(
        self,
        param_name: str,
        minimum: int | float,
        maximum: int | float,
        value: int | float,
    ):
        super().__init__(
            f"The valid range for the {param_name} parameter is: {minimum=}, {maximum=}, but actual value is {value=}"
        )


class SpaceParamsError(ValidationError):
    def __init__(self, r: float, required_above: float, reason: str):
        super().__init__(
            f"The regularity exponent must satisfy r > {required_above} ({reason}), but {r=}"
        )


class DimensionMismatchError(ValidationError):
    def __init__(self, expected: typing.Any, found: typing.Any, what: str = "dim"):
        super().__init__(f"Mismatching {what}: {expected=}, {found=}")


class UnsupportedPrimitiveError(ValidationError):
    def __init__(self, primitive: str, expression: str):
        super().__init__(
            f"The expression uses the unsupported primitive {primitive!r}; allowed are +, *, non-negative integer powers, sin, cos, exp. {expression=}"
        )


class UnknownVariableError(ValidationError):
    def __init__(self, name: str, allowed: typing.Iterable[str]):
        super().__init__(
            f"The expression uses the unknown variable {name!r}; allowed variables: {sorted(allowed)}"
        )


class DomainBallError(ValidationError):
    def __init__(self, sup_bound: float, domain_radius: float):
        super().__init__(
            f"The field leaves the domain ball of the nonlinearity: {sup_bound=}, {domain_radius=}"
        )


class UnsupportedDimensionError(ValidationError):
    def __init__(self, dim: int):
        super().__init__(
            f"Bifurcation analysis is available for d = 1, 2 only, got {dim=}. For d >= 3 the"
            " bifurcation equation for alpha_1 contains terms without a factor alpha_1, so the"
            " reduction used here does not apply."
        )


class KernelNotSimpleError(ValidationError):
    def __init__(self, kernel_modes: list[tuple[int, ...]], reason: str):
        super().__init__(
            f"The kernel is not a single sign-flip orbit of a vector with nonzero entries ({reason}): {kernel_modes=}"
        )


class WrongTimeDirectionError(ValidationError):
    def __init__(self, block: str, t: float):
        super().__init__(
            f"The {block!r} semigroup is only defined for {'t >= 0' if block == 's' else 't <= 0'}, but {t=}"
        )


class ThetaTruncationError(ValidationError):
    def __init__(self, theta_modes: int, tail_energy: float):
        super().__init__(
            f"The forcing has theta content beyond |l| <= {theta_modes}: {tail_energy=}"
        )


# exit code 3: an iteration failed to converge


class DivergenceError(SpectralTorusError):
    exit_code = 3


class PicardDivergenceError(DivergenceError):
    def __init__(self, iteration: int, step_ratios: list[float]):
        super().__init__(
            f"Picard iteration diverged at {iteration=}: the last step ratios were {step_ratios}"
        )


class BallEscapeError(DivergenceError):
    def __init__(self, iteration: int, norm: float, ball_radius: float):
        super().__init__(
            f"Iterate left the ball B_s(0) at {iteration=}: {norm=}, {ball_radius=}"
        )


class MaxIterationsError(DivergenceError):
    def __init__(self, max_iter: int, last_step: float):
        super().__init__(f"No convergence within {max_iter=}, {last_step=}")


class NewtonStagnationError(DivergenceError):
    def __init__(self, iteration: int, residual: float):
        super().__init__(f"Newton's method stagnated at {iteration=}, {residual=}")


class BranchCollapseError(DivergenceError):
    def __init__(self, eps_m: float, norm: float):
        super().__init__(
            f"Newton's method collapsed onto the zero solution: {eps_m=}, {norm=}"
        )


class AlphaTooLargeError(DivergenceError):
    def __init__(self, alpha_size: float, contraction_bound: float):
        super().__init__(
            f"The kernel amplitude is outside the contraction ball of the range equation: {alpha_size=}, {contraction_bound=}"
        )


class QuadratureTailError(DivergenceError):
    def __init__(self, beta: float, tail_tol: float, horizon: float, max_horizon: float):
        super().__init__(
            f"The hyperbolic gap is too small for the requested tail tolerance: {beta=}, {tail_tol=}, {horizon=}, {max_horizon=}"
        )


class EmptyHyperbolicSpectrumError(DivergenceError):
    def __init__(self, cutoff: int):
        super().__init__(
            f"No hyperbolic modes in the truncation box, increase the cutoff: {cutoff=}"
        )


# exit code 4: the problem belongs to a different solver


class ResonanceMisrouteError(SpectralTorusError):
    exit_code = 4


class SingularMultiplierError(ResonanceMisrouteError):
    def __init__(self, mode: tuple[int, ...], multiplier: float, tolerance: float):
        super().__init__(
            f"Cannot invert the operator, a multiplier is within tolerance of zero: {mode=}, {multiplier=}, {tolerance=}"
        )


class ResonantSpecError(ResonanceMisrouteError):
    def __init__(self, kernel_modes: list[tuple[int, ...]], classification: str):
        super().__init__(
            f"The operator is {classification}, use the bifurcation or center-manifold path: {kernel_modes=}"
        )


class NotResonantError(ResonanceMisrouteError):
    def __init__(self, nu: tuple[float, ...], m0: float):
        super().__init__(f"The operator has an empty kernel: {nu=}, {m0=}")


class EvolutionCenterRouteError(ResonanceMisrouteError):
    def __init__(self, classification: str):
        super().__init__(
            f"The evolution problem is classified {classification!r} and has no fixed-point response solution here; use the center-manifold reduction"
        )


class BranchDoesNotExistError(ResonanceMisrouteError):
    def __init__(self, eps_m: float, sigma: int):
        super().__init__(
            f"No real branch: nontrivial solutions exist only for sign(eps_m) == sigma, but {eps_m=}, {sigma=}"
        )


class DegenerateBifurcationError(ResonanceMisrouteError):
    def __init__(self, reason: str):
        super().__init__(f"The bifurcation coefficients are degenerate: {reason}")


# exit code 5: files


class ReportIOError(SpectralTorusError):
    exit_code = 5


class FieldFormatError(ReportIOError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot read coefficient file {path}: {reason}")


class MalformedReportError(ReportIOError):
    def __init__(self, path: str, missing_columns: list[str]):
        super().__init__(f"The report {path} is missing columns: {missing_columns}")
