import pathlib
import typing

import pydantic
import pydantic_settings


class QuadratureConfig(pydantic.BaseModel):
    """Composite Gauss quadrature on graded panels for the Duhamel integrals."""

    tail_tol: float = pydantic.Field(default=1e-12, gt=0.0, lt=1.0)
    gauss_order: int = pydantic.Field(default=16, ge=2, le=64)
    first_panel: float = pydantic.Field(default=0.25, gt=0.0)
    panel_growth: float = pydantic.Field(default=1.25, ge=1.0, le=4.0)
    max_panel: float = pydantic.Field(default=0.5, gt=0.0)
    max_horizon: float = pydantic.Field(default=400.0, gt=0.0)


class NewtonConfig(pydantic.BaseModel):
    cutoff: int = pydantic.Field(default=32, ge=1, le=256)
    tol: float = pydantic.Field(default=1e-11, gt=0.0)
    max_iter: int = pydantic.Field(default=40, ge=1)
    gmres_rtol: float = pydantic.Field(default=1e-13, gt=0.0)
    gmres_restart: int = pydantic.Field(default=200, ge=1)
    gmres_maxiter: int = pydantic.Field(default=50, ge=1)
    stagnation_window: int = pydantic.Field(default=4, ge=1)
    # reduce to fields even in every coordinate, removing the translation null space
    symmetric: bool = True


class ManifoldConfig(pydantic.BaseModel):
    theta_modes: int = pydantic.Field(default=8, ge=0, le=64)
    cutoff_radius: float = pydantic.Field(default=2.0, gt=0.0)
    r_smooth: int = pydantic.Field(default=3, ge=1, le=10)
    jet_tol: float = pydantic.Field(default=1e-14, gt=0.0)
    max_updates: int = pydantic.Field(default=30, ge=1)
    slow_rate: float = pydantic.Field(default=0.0, ge=0.0)


class Config(pydantic_settings.BaseSettings):
    """
     Runtime settings of the spectral_torus library and CLI.

     You have 3 options to work with this class:

    1. Pass the settings directly when instantiating the Config object

       `config = Config(log_level="DEBUG")`

    2. Specify a `.env` file in the working directory of your script,
       then the Config object will automatically try to read its settings from there.
       Variables are prefixed with `SPECTRAL_TORUS_`, nested keys use `__`,
       e.g. `SPECTRAL_TORUS_QUADRATURE__TAIL_TOL=1e-10`.

       `config = Config()`

    3. Specify the `.env` file path explicitly when instantiating the Config object.

    `config = Config(_env_file='cluster.env')`

    """

    model_config = pydantic_settings.SettingsConfigDict(
        env_prefix="SPECTRAL_TORUS_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    log_level: str = "INFO"
    out_dir: pathlib.Path = pathlib.Path("runs")
    kmax: int = pydantic.Field(default=64, ge=1, le=1024)
    kernel_tolerance: float = pydantic.Field(default=1e-9, gt=0.0)

    quadrature: QuadratureConfig = QuadratureConfig()
    newton: NewtonConfig = NewtonConfig()
    manifold: ManifoldConfig = ManifoldConfig()


Scenario = typing.Literal[
    "solve",
    "scan",
    "bifurcate",
    "evolution",
    "center-manifold",
    "measure-sweep",
    "plot",
]


class _Section(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")


class OperatorSection(_Section):
    dim: int | None = pydantic.Field(default=None, ge=1, le=3)
    nu: list[float] | None = None
    m: float | None = None
    omega: list[float] | None = None


class NonlinearitySection(_Section):
    f: str | None = None
    domain_radius: float | None = pydantic.Field(default=None, gt=0.0)


class SpaceSection(_Section):
    rho: float = pydantic.Field(default=0.0, ge=0.0)
    r: float = pydantic.Field(default=4.0, ge=0.0)
    cutoff: int = pydantic.Field(default=32, ge=0, le=256)


class SolverSection(_Section):
    epsilon: float | None = pydantic.Field(default=None, ge=0.0)
    radius: float = pydantic.Field(default=0.5, gt=0.0)
    tol: float = pydantic.Field(default=1e-12, gt=0.0)
    max_iter: int = pydantic.Field(default=500, ge=1)
    lip_samples: int = pydantic.Field(default=64, ge=1)
    uniqueness_starts: int = pydantic.Field(default=0, ge=0)


class ScanSection(_Section):
    delta: float = pydantic.Field(default=1e-6, ge=0.0)
    kmax: int = pydantic.Field(default=64, ge=1)


class BifurcationSection(_Section):
    m0: float | None = None
    eps_range: list[float] | None = None
    phase: list[float] | None = None
    verify: bool = False
    kmax: int = pydantic.Field(default=64, ge=1)
    newton: NewtonConfig = NewtonConfig()

    @pydantic.field_validator("eps_range", mode="before")
    @classmethod
    def parse_eps_range(cls, value: typing.Any) -> typing.Any:
        """Accepts `start:stop:count` (geometric grid, signs kept) or a comma list."""
        if not isinstance(value, str):
            return value
        if ":" in value:
            start, stop, count = value.split(":")
            return geometric_grid(float(start), float(stop), int(count))
        return [float(item) for item in value.split(",") if item.strip()]


class CenterManifoldSection(_Section):
    epsilon: float | None = pydantic.Field(default=None, ge=0.0)
    manifold: ManifoldConfig = ManifoldConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    z0: list[float] | None = None
    t_final: float = pydantic.Field(default=10.0, gt=0.0)
    ode_points: int = pydantic.Field(default=101, ge=2)
    samples: int = pydantic.Field(default=16, ge=1)
    radii: list[float] = [0.1, 0.2, 0.4]
    step: float = pydantic.Field(default=0.05, gt=0.0)


class MeasureSection(_Section):
    dim: int | None = pydantic.Field(default=None, ge=1, le=3)
    m: float | None = None
    deltas: list[float] = [1e-1, 3e-2, 1e-2]
    samples: int = pydantic.Field(default=100_000, ge=1)
    kmax: int = pydantic.Field(default=64, ge=1)


class PlotSection(_Section):
    csv_in: pathlib.Path | None = None
    svg_out: pathlib.Path | None = None


class OutputsSection(_Section):
    field: str = "solution.txt"
    report: str = "report.csv"
    scan: str = "scan.txt"
    bifurcation_csv: str = "bifurcation.csv"
    verify_report: str = "branch_verify.txt"
    jet: str = "jet.txt"
    ode: str = "reduced_ode.csv"
    residual_report: str = "invariance.csv"
    measure_csv: str = "measure.csv"
    summary: str = "summary.json"


class ExperimentConfig(_Section):
    """One reproducible run: everything a scenario needs plus the seed."""

    scenario: Scenario | None = None
    seed: int = 0
    out_dir: pathlib.Path = pathlib.Path("runs")
    verbose: bool = False

    operator: OperatorSection = OperatorSection()
    nonlinearity: NonlinearitySection = NonlinearitySection()
    space: SpaceSection = SpaceSection()
    solver: SolverSection = SolverSection()
    scan: ScanSection = ScanSection()
    bifurcation: BifurcationSection = BifurcationSection()
    center_manifold: CenterManifoldSection = CenterManifoldSection()
    measure: MeasureSection = MeasureSection()
    plot: PlotSection = PlotSection()
    outputs: OutputsSection = OutputsSection()


def geometric_grid(start: float, stop: float, count: int) -> list[float]:
    """Geometric grid between two values of equal sign, ends included."""
    if count == 1:
        return [start]
    if start == 0.0 or stop == 0.0 or (start > 0) != (stop > 0):
        raise ValueError(
            f"A geometric grid needs nonzero ends of equal sign: {start=}, {stop=}"
        )
    sign = 1.0 if start > 0 else -1.0
    ratio = (abs(stop) / abs(start)) ** (1.0 / (count - 1))
    return [sign * abs(start) * ratio**i for i in range(count)]


def load_experiment_config(
    path: pathlib.Path | None, overrides: dict[str, typing.Any] | None = None
) -> ExperimentConfig:
    """Reads an experiment TOML file and applies overrides on top of it.

    Args:
        path: TOML file, or None to start from an empty config.
        overrides: nested mapping (e.g. from CLI flags); wins over file keys.

    Returns:
        The validated (by pydantic) experiment config. Scenario-level consistency
        is checked separately by `models.validation.validate_experiment`.
    """
    data: dict[str, typing.Any] = {}
    if path is not None:
        if not path.exists():
            raise FileNotFoundError(path)
        data = pydantic_settings.TomlConfigSettingsSource(
            ExperimentConfig, toml_file=path
        )()
    merged = _deep_merge(data, overrides or {})
    return ExperimentConfig.model_validate(merged)


def _deep_merge(
    base: dict[str, typing.Any], updates: dict[str, typing.Any]
) -> dict[str, typing.Any]:
    merged = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
