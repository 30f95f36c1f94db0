from __future__ import annotations

import enum
import typing

import numpy as np
import pydantic

from spectral_torus import errors

WaveVector = tuple[int, ...]
SpectralMode = tuple[WaveVector, int]


class BaseModel(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)


class ArrayModel(pydantic.BaseModel):
    """Frozen model carrying numpy arrays; arrays are stored read-only."""

    model_config = pydantic.ConfigDict(frozen=True, arbitrary_types_allowed=True)


def _readonly(array: typing.Any, dtype: typing.Any = np.complex128) -> np.ndarray:
    frozen = np.array(array, dtype=dtype, copy=True)
    frozen.setflags(write=False)
    return frozen


class SpaceParams(BaseModel):
    rho: float = pydantic.Field(default=0.0, ge=0.0)
    r: float = pydantic.Field(default=0.0, ge=0.0)

    def require_algebra(self, dim: int, loss: float = 0.0) -> None:
        """Raises unless r - loss > dim/2 (algebra and sup bounds need it)."""
        if self.r - loss <= dim / 2:
            raise errors.SpaceParamsError(
                r=self.r,
                required_above=dim / 2 + loss,
                reason=f"algebra property in dimension {dim} after losing {loss} derivatives",
            )

    def lowered(self, order: float) -> SpaceParams:
        return SpaceParams(rho=self.rho, r=self.r - order)


class SupBound(typing.NamedTuple):
    bound: float
    sobolev_constant: float


class SpectralField(ArrayModel):
    """Truncated Fourier series on the torus.

    The coefficient array has one axis per frequency (theta) dimension followed
    by one axis per spatial dimension, each of length 2K+1, index K being the
    zero mode. Modes outside the box are zero by construction.
    """

    dim: int = pydantic.Field(ge=1)
    cutoff: int = pydantic.Field(ge=0)
    coeffs: np.ndarray
    is_real: bool = True
    freq_dim: int = pydantic.Field(default=0, ge=0)

    @pydantic.field_validator("coeffs", mode="before")
    @classmethod
    def coeffs_to_complex_array(cls, value: typing.Any) -> np.ndarray:
        return _readonly(value)

    @pydantic.model_validator(mode="after")
    def check_shape(self) -> SpectralField:
        expected = (2 * self.cutoff + 1,) * (self.freq_dim + self.dim)
        if self.coeffs.shape != expected:
            raise errors.DimensionMismatchError(
                expected=expected, found=self.coeffs.shape, what="coefficient shape"
            )
        return self

    @classmethod
    def zeros(
        cls,
        dim: int,
        cutoff: int,
        is_real: bool = True,
        freq_dim: int = 0,
    ) -> typing.Self:
        shape = (2 * cutoff + 1,) * (freq_dim + dim)
        return cls(
            dim=dim,
            cutoff=cutoff,
            coeffs=np.zeros(shape, dtype=np.complex128),
            is_real=is_real,
            freq_dim=freq_dim,
        )

    @classmethod
    def from_modes(
        cls,
        dim: int,
        cutoff: int,
        modes: dict[WaveVector, complex],
        is_real: bool = True,
        freq_dim: int = 0,
    ) -> typing.Self:
        """Builds a field from a sparse {wave vector: amplitude} map.

        Wave vectors have freq_dim + dim entries (theta indices first).
        """
        coeffs = np.zeros((2 * cutoff + 1,) * (freq_dim + dim), dtype=np.complex128)
        for k, value in modes.items():
            if len(k) != freq_dim + dim:
                raise errors.DimensionMismatchError(
                    expected=freq_dim + dim, found=len(k), what="wave vector length"
                )
            if any(abs(ki) > cutoff for ki in k):
                continue
            coeffs[tuple(ki + cutoff for ki in k)] += value
        return cls(
            dim=dim, cutoff=cutoff, coeffs=coeffs, is_real=is_real, freq_dim=freq_dim
        )

    @property
    def n_axes(self) -> int:
        return self.freq_dim + self.dim

    def coefficient(self, k: WaveVector) -> complex:
        if any(abs(ki) > self.cutoff for ki in k):
            return 0j
        return complex(self.coeffs[tuple(ki + self.cutoff for ki in k)])

    def axis_wavenumbers(self) -> list[np.ndarray]:
        """Integer wave numbers per axis, shaped to broadcast against coeffs."""
        line = np.arange(-self.cutoff, self.cutoff + 1)
        result = []
        for axis in range(self.n_axes):
            shape = [1] * self.n_axes
            shape[axis] = line.size
            result.append(line.reshape(shape))
        return result

    def spatial_wavenumbers(self) -> list[np.ndarray]:
        return self.axis_wavenumbers()[self.freq_dim :]

    def with_coeffs(self, coeffs: np.ndarray, is_real: bool | None = None) -> typing.Self:
        return type(self)(
            dim=self.dim,
            cutoff=self.cutoff,
            coeffs=coeffs,
            is_real=self.is_real if is_real is None else is_real,
            freq_dim=self.freq_dim,
        )

    def with_cutoff(self, cutoff: int) -> typing.Self:
        """Truncates to, or zero-pads up to, another cutoff."""
        shape = (2 * cutoff + 1,) * self.n_axes
        coeffs = np.zeros(shape, dtype=np.complex128)
        common = min(cutoff, self.cutoff)
        source = tuple(
            slice(self.cutoff - common, self.cutoff + common + 1)
            for _ in range(self.n_axes)
        )
        target = tuple(
            slice(cutoff - common, cutoff + common + 1) for _ in range(self.n_axes)
        )
        coeffs[target] = self.coeffs[source]
        return type(self)(
            dim=self.dim,
            cutoff=cutoff,
            coeffs=coeffs,
            is_real=self.is_real,
            freq_dim=self.freq_dim,
        )

    def reflected_conjugate(self) -> np.ndarray:
        """Array of conj(u_{-k}) at position k."""
        return np.conj(np.flip(self.coeffs))

    def reality_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - self.reflected_conjugate()), initial=0.0))

    def realified(self) -> typing.Self:
        """Projects onto the real fields (removes round-off asymmetry)."""
        return self.with_coeffs(0.5 * (self.coeffs + self.reflected_conjugate()), True)

    def _check_compatible(self, other: SpectralField) -> None:
        if (self.dim, self.freq_dim, self.cutoff) != (
            other.dim,
            other.freq_dim,
            other.cutoff,
        ):
            raise errors.DimensionMismatchError(
                expected=(self.dim, self.freq_dim, self.cutoff),
                found=(other.dim, other.freq_dim, other.cutoff),
                what="(dim, freq_dim, cutoff)",
            )

    def __add__(self, other: SpectralField) -> typing.Self:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs, self.is_real and other.is_real)

    def __sub__(self, other: SpectralField) -> typing.Self:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs, self.is_real and other.is_real)

    def __neg__(self) -> typing.Self:
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: complex) -> typing.Self:
        if isinstance(scalar, SpectralField):
            return NotImplemented
        is_real = self.is_real and complex(scalar).imag == 0.0
        return self.with_coeffs(self.coeffs * scalar, is_real)

    __rmul__ = __mul__


class EvolutionField(SpectralField):
    """Field on T^b x T^d indexed by (l, k); the hull function of a response solution."""

    freq_dim: int = pydantic.Field(default=1, ge=1)


class EllipticOperatorSpec(BaseModel):
    nu: tuple[float, ...] = pydantic.Field(min_length=1)
    m: float

    @pydantic.field_validator("nu")
    @classmethod
    def nu_in_unit_range(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        for nu_i in value:
            if not 1.0 <= nu_i <= 2.0:
                raise errors.ParameterNumberRangeError("nu", 1.0, 2.0, nu_i)
        return value

    @property
    def dim(self) -> int:
        return len(self.nu)


class EvolutionOperatorSpec(EllipticOperatorSpec):
    omega: tuple[float, ...] = pydantic.Field(min_length=1)

    @property
    def freq_dim(self) -> int:
        return len(self.omega)

    def spatial(self) -> EllipticOperatorSpec:
        return EllipticOperatorSpec(nu=self.nu, m=self.m)


OperatorSpec = EllipticOperatorSpec | EvolutionOperatorSpec


class ResonanceClassification(str, enum.Enum):
    NONRESONANT = "nonresonant"
    RESONANT = "resonant"
    EVOLUTION_H1 = "evolution-H1"
    EVOLUTION_H2 = "evolution-H2"
    EVOLUTION_CENTER = "evolution-center"


class ResonanceReport(BaseModel):
    kernel_modes: list[WaveVector]
    margin: float
    classification: ResonanceClassification
    delta: float
    kmax: int
    tolerance: float

    def to_text(self) -> str:
        modes = ";".join(",".join(str(ki) for ki in k) for k in self.kernel_modes)
        lines = [
            f"classification = {self.classification.value}",
            f"margin = {self.margin:.17g}",
            f"delta = {self.delta:.17g}",
            f"kmax = {self.kmax}",
            f"tolerance = {self.tolerance:.17g}",
            f"kernel_size = {len(self.kernel_modes)}",
            f"kernel_modes = {modes}",
        ]
        return "\n".join(lines) + "\n"


class MeasureEstimate(BaseModel):
    dim: int
    m: float
    delta: float
    analytic_bound: float
    monte_carlo: float
    stderr: float
    samples: int
    seed: int


class SolveConfig(BaseModel):
    epsilon: float = pydantic.Field(ge=0.0)
    ball_radius: float = pydantic.Field(default=0.5, gt=0.0)
    tol: float = pydantic.Field(default=1e-12, gt=0.0)
    max_iter: int = pydantic.Field(default=500, ge=1)
    space: SpaceParams = SpaceParams(rho=0.0, r=4.0)
    cutoff: int = pydantic.Field(default=32, ge=0)
    lip_samples: int = pydantic.Field(default=64, ge=1)
    seed: int = 0


class SolveResult(ArrayModel):
    solution: SpectralField
    residual: float
    iterations: int
    contraction_estimate: float
    epsilon_star: float
    outside_certified_regime: bool = False
    step_history: list[float] = []


class KernelBasis(BaseModel):
    """Kernel wave vectors in the fixed order used for the amplitudes.

    d = 1: (a), (-a).  d = 2: (a, b), (a, -b), (-a, b), (-a, -b), so that
    mode j and mode 2^d - 1 - j are opposite.
    """

    nu: tuple[float, ...]
    m0: float
    base_vector: WaveVector
    modes: list[WaveVector]

    @property
    def dim(self) -> int:
        return len(self.base_vector)

    def partner(self, j: int) -> int:
        return len(self.modes) - 1 - j

    def spec(self) -> EllipticOperatorSpec:
        return EllipticOperatorSpec(nu=self.nu, m=self.m0)


class BranchSolution(ArrayModel):
    eps_m: float
    field: SpectralField
    residual: float
    iterations: int
    phase: tuple[float, ...]
    z_measured: list[float]


class BifurcationData(BaseModel):
    dim: int
    A: float
    B: float | None = None
    M: list[list[float]]
    sigma: int
    determinant: float
    printed_M: float | None = None
    leading_z: list[float] | None = None
    branches: list[BranchSolution] = []

    model_config = pydantic.ConfigDict(frozen=True, arbitrary_types_allowed=True)


class BranchVerificationReport(BaseModel):
    dim: int
    max_even_coefficient: float
    max_factorization_violation: float
    extracted: dict[str, float]
    formula: dict[str, float]
    matches_formula: bool
    printed_M: float | None = None
    printed_discrepancy: bool = False
    eps_m: float
    predicted_z: float
    measured_z: float | None = None

    def to_text(self) -> str:
        lines = [
            f"dim = {self.dim}",
            f"max_even_coefficient = {self.max_even_coefficient:.3e}",
            f"max_factorization_violation = {self.max_factorization_violation:.3e}",
        ]
        for name, value in self.extracted.items():
            lines.append(
                f"extracted_{name} = {value:.17g} (closed form {self.formula[name]:.17g})"
            )
        lines.append(f"matches_formula = {self.matches_formula}")
        if self.printed_M is not None:
            lines.append(f"printed_M = {self.printed_M:.17g}")
            lines.append(f"printed_discrepancy = {self.printed_discrepancy}")
            if self.printed_discrepancy:
                ratio = self.extracted["M"] / self.printed_M
                lines.append(
                    f"note = the expansion gives M = {self.extracted['M']:.17g}, a factor {ratio:.6g} from the printed value"
                )
        lines.append(f"eps_m = {self.eps_m:.17g}")
        lines.append(f"predicted_z = {self.predicted_z:.17g}")
        if self.measured_z is not None:
            lines.append(f"measured_z = {self.measured_z:.17g}")
        return "\n".join(lines) + "\n"


class FirstOrderState(ArrayModel):
    """z = (u, v) with v = u_t."""

    u: SpectralField
    v: SpectralField

    @pydantic.model_validator(mode="after")
    def check_matching(self) -> FirstOrderState:
        self.u._check_compatible(self.v)
        return self

    def norm(self, space: SpaceParams) -> float:
        from spectral_torus.spectral import space as spectral_space

        return float(
            np.sqrt(
                spectral_space.norm(self.u, space) ** 2
                + spectral_space.norm(self.v, space.lowered(1.0)) ** 2
            )
        )


class FirstOrderSystem(BaseModel):
    """z_t = A z for z = (u, v): u_t = v, v_t = -sum nu_i^2 d^2u/dx_i^2 - m u.

    On e^{ik.x} A acts by the block [[0, 1], [sigma_k, 0]] with
    sigma_k = sum nu_i^2 k_i^2 - m and eigenvalues lambda = +-sqrt(sigma_k).
    """

    spec: EllipticOperatorSpec
    cutoff: int = pydantic.Field(ge=0)

    @property
    def dim(self) -> int:
        return self.spec.dim

    def sigma(self, k: WaveVector) -> float:
        if len(k) != self.dim:
            raise errors.DimensionMismatchError(expected=self.dim, found=len(k))
        return sum(nu_i**2 * k_i**2 for nu_i, k_i in zip(self.spec.nu, k)) - self.spec.m

    def block(self, k: WaveVector) -> np.ndarray:
        return np.array([[0.0, 1.0], [self.sigma(k), 0.0]])

    def eigenvalues(self, k: WaveVector) -> tuple[complex, complex]:
        """(lambda^+, lambda^-); purely imaginary when sigma_k < 0."""
        root = np.sqrt(complex(self.sigma(k)))
        return complex(root), complex(-root)

    def eigenvector(self, k: WaveVector, sign: int) -> np.ndarray:
        """Coefficients (1, lambda) of Phi = (e^{ik.x}, lambda e^{ik.x})."""
        plus, minus = self.eigenvalues(k)
        return np.array([1.0, plus if sign > 0 else minus], dtype=np.complex128)

    def sigma_grid(self) -> np.ndarray:
        line = np.arange(-self.cutoff, self.cutoff + 1)
        values = np.full((line.size,) * self.dim, -self.spec.m, dtype=float)
        for i, nu_i in enumerate(self.spec.nu):
            shape = [1] * self.dim
            shape[i] = line.size
            values = values + nu_i**2 * line.reshape(shape) ** 2
        return values

    def apply(self, z: FirstOrderState) -> FirstOrderState:
        if (z.u.dim, z.u.cutoff) != (self.dim, self.cutoff):
            raise errors.DimensionMismatchError(
                expected=(self.dim, self.cutoff), found=(z.u.dim, z.u.cutoff), what="(dim, cutoff)"
            )
        return FirstOrderState(u=z.v, v=z.u.with_coeffs(z.u.coeffs * self.sigma_grid()))


class SplittingPolicy(BaseModel):
    """Modes with |Re lambda| <= slow_rate join the center part."""

    slow_rate: float = pydantic.Field(default=0.0, ge=0.0)


class SpectralSplitting(BaseModel):
    nu: tuple[float, ...]
    m: float
    cutoff: int
    stable_modes: list[SpectralMode]
    unstable_modes: list[SpectralMode]
    center_modes: list[SpectralMode]
    beta1: float
    beta2: float
    beta3_minus: float
    beta3_plus: float
    slow_rate: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.nu)

    def center_wave_vectors(self) -> list[WaveVector]:
        return sorted({k for k, _ in self.center_modes})

    def hyperbolic_modes(self) -> list[SpectralMode]:
        return sorted(self.stable_modes + self.unstable_modes)


class ManifoldJet(ArrayModel):
    """Quadratic jet of the graph map w(theta, z_c).

    w_h(theta, z) = sum_l e^{i l.theta} (constant[l, h] + linear[l, h, :] . z
                    + z . quadratic[l, h, :, :] . z)

    with h running over `hyperbolic` (wave vector, sign) pairs, z the real
    center coordinates and quadratic symmetric in its last two axes.
    """

    freq_dim: int = pydantic.Field(ge=1)
    theta_modes: int = pydantic.Field(ge=0)
    hyperbolic: list[SpectralMode]
    n_center: int = pydantic.Field(ge=0)
    constant: np.ndarray
    linear: np.ndarray
    quadratic: np.ndarray

    @pydantic.field_validator("constant", "linear", "quadratic", mode="before")
    @classmethod
    def to_complex_array(cls, value: typing.Any) -> np.ndarray:
        return _readonly(value)

    @pydantic.model_validator(mode="after")
    def check_shapes(self) -> ManifoldJet:
        theta_shape = (2 * self.theta_modes + 1,) * self.freq_dim
        n_h = len(self.hyperbolic)
        expected = {
            "constant": theta_shape + (n_h,),
            "linear": theta_shape + (n_h, self.n_center),
            "quadratic": theta_shape + (n_h, self.n_center, self.n_center),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise errors.DimensionMismatchError(
                    expected=shape, found=getattr(self, name).shape, what=name
                )
        return self

    @classmethod
    def zeros(
        cls,
        freq_dim: int,
        theta_modes: int,
        hyperbolic: list[SpectralMode],
        n_center: int,
    ) -> ManifoldJet:
        theta_shape = (2 * theta_modes + 1,) * freq_dim
        n_h = len(hyperbolic)
        return cls(
            freq_dim=freq_dim,
            theta_modes=theta_modes,
            hyperbolic=hyperbolic,
            n_center=n_center,
            constant=np.zeros(theta_shape + (n_h,)),
            linear=np.zeros(theta_shape + (n_h, n_center)),
            quadratic=np.zeros(theta_shape + (n_h, n_center, n_center)),
        )

    def with_coefficients(
        self, constant: np.ndarray, linear: np.ndarray, quadratic: np.ndarray
    ) -> ManifoldJet:
        return ManifoldJet(
            freq_dim=self.freq_dim,
            theta_modes=self.theta_modes,
            hyperbolic=self.hyperbolic,
            n_center=self.n_center,
            constant=constant,
            linear=linear,
            quadratic=quadratic,
        )

    def distance(self, other: ManifoldJet) -> float:
        """Sup norm of the coefficient difference."""
        return float(
            max(
                np.max(np.abs(self.constant - other.constant), initial=0.0),
                np.max(np.abs(self.linear - other.linear), initial=0.0),
                np.max(np.abs(self.quadratic - other.quadratic), initial=0.0),
            )
        )

    def size(self) -> float:
        return float(
            max(
                np.max(np.abs(self.constant), initial=0.0),
                np.max(np.abs(self.linear), initial=0.0),
                np.max(np.abs(self.quadratic), initial=0.0),
            )
        )

    def theta_phases(self, theta: typing.Sequence[float]) -> np.ndarray:
        line = np.arange(-self.theta_modes, self.theta_modes + 1)
        phase = np.array(1.0 + 0.0j)
        for j in range(self.freq_dim):
            phase = np.multiply.outer(phase, np.exp(1j * line * theta[j]))
        return phase

    def evaluate(self, theta: typing.Sequence[float], z: np.ndarray) -> np.ndarray:
        """Hyperbolic coordinates w_h(theta, z) for every h."""
        phase = self.theta_phases(theta)
        axes = tuple(range(self.freq_dim))
        c0 = np.tensordot(phase, self.constant, axes=(axes, axes))
        c1 = np.tensordot(phase, self.linear, axes=(axes, axes))
        c2 = np.tensordot(phase, self.quadratic, axes=(axes, axes))
        return c0 + c1 @ z + np.einsum("hab,a,b->h", c2, z, z)
