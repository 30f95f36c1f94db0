from spectral_torus import errors
from spectral_torus.config import config

_NEEDS_OPERATOR = {"solve", "scan", "bifurcate", "evolution", "center-manifold"}
_NEEDS_NONLINEARITY = {"solve", "evolution", "center-manifold"}
_NEEDS_OMEGA = {"evolution", "center-manifold"}
# derivative loss of the fixed-point map
_DERIVATIVE_LOSS = 2.0


def validate_experiment(experiment: config.ExperimentConfig) -> None:
    """Raises an error listing every violated constraint of an experiment config.
    Requirements depend on the scenario:
    - every scenario except `plot` and `measure-sweep` needs an operator (nu, and m
      or bifurcation.m0), with len(nu) == operator.dim when dim is given
    - solve, evolution and center-manifold need a nonlinearity and an epsilon
    - evolution and center-manifold need omega
    - solve and evolution need r - 2 > d/2 (r - 2 > max(b, d)/2 with omega)
    - bifurcate needs d in {1, 2} and a nonempty eps_range
    - measure-sweep needs a dimension, m and positive deltas
    - plot needs the input csv and the output svg paths

    Args:
        experiment: the pydantic-validated experiment config.

    Raises:
        ExperimentValidationError: if any requirement is violated; all violations are listed.
    """
    validator = ExperimentConsistencyValidator(experiment=experiment)
    validator.validate_experiment()


class ExperimentConsistencyValidator:
    experiment: config.ExperimentConfig

    # collected messages, one per violated constraint
    violations: list[str]

    def __init__(self, experiment: config.ExperimentConfig):
        self.experiment = experiment
        self.violations = []

    def validate_experiment(self) -> None:
        scenario = self.experiment.scenario
        if scenario is None:
            self.violations.append("scenario: missing")
        else:
            if scenario in _NEEDS_OPERATOR:
                self._check_operator(scenario)
            if scenario in _NEEDS_NONLINEARITY:
                self._check_nonlinearity(scenario)
            if scenario in ("solve", "evolution"):
                self._check_regularity()
            if scenario == "bifurcate":
                self._check_bifurcation()
            if scenario == "measure-sweep":
                self._check_measure()
            if scenario == "plot":
                self._check_plot()
        if self.violations:
            raise errors.ExperimentValidationError(self.violations)

    def _dimension(self) -> int | None:
        operator = self.experiment.operator
        if operator.dim is not None:
            return operator.dim
        return len(operator.nu) if operator.nu else None

    def _check_operator(self, scenario: str) -> None:
        operator = self.experiment.operator
        if not operator.nu:
            self.violations.append("operator.nu: missing")
        elif operator.dim is not None and len(operator.nu) != operator.dim:
            self.violations.append(
                f"operator.nu: expected {operator.dim} entries (operator.dim), found {len(operator.nu)}"
            )
        if operator.nu and any(not 1.0 <= nu_i <= 2.0 for nu_i in operator.nu):
            self.violations.append(f"operator.nu: entries must lie in [1, 2], found {operator.nu}")
        if operator.m is None and not (
            scenario == "bifurcate" and self.experiment.bifurcation.m0 is not None
        ):
            self.violations.append("operator.m: missing")
        if scenario in _NEEDS_OMEGA and not operator.omega:
            self.violations.append(f"operator.omega: missing, required by the {scenario} scenario")

    def _check_nonlinearity(self, scenario: str) -> None:
        if not self.experiment.nonlinearity.f:
            self.violations.append("nonlinearity.f: missing")
        epsilon = (
            self.experiment.center_manifold.epsilon
            if scenario == "center-manifold"
            else self.experiment.solver.epsilon
        )
        if epsilon is None:
            section = "center_manifold" if scenario == "center-manifold" else "solver"
            self.violations.append(f"{section}.epsilon: missing")

    def _check_regularity(self) -> None:
        dim = self._dimension()
        if dim is None:
            return
        omega = self.experiment.operator.omega
        effective = max(dim, len(omega)) if omega else dim
        r = self.experiment.space.r
        if r - _DERIVATIVE_LOSS <= effective / 2:
            self.violations.append(
                f"space.r: r - 2 > {effective}/2 is required, found r={r}"
            )

    def _check_bifurcation(self) -> None:
        dim = self._dimension()
        if dim is not None and dim not in (1, 2):
            self.violations.append(f"operator.dim: bifurcation needs d in {{1, 2}}, found {dim}")
        if not self.experiment.bifurcation.eps_range:
            self.violations.append("bifurcation.eps_range: missing")
        phase = self.experiment.bifurcation.phase
        if phase is not None and dim is not None and len(phase) != dim:
            self.violations.append(
                f"bifurcation.phase: expected {dim} entries, found {len(phase)}"
            )

    def _check_measure(self) -> None:
        measure = self.experiment.measure
        if measure.dim is None and self._dimension() is None:
            self.violations.append("measure.dim: missing")
        if measure.m is None and self.experiment.operator.m is None:
            self.violations.append("measure.m: missing")
        if not measure.deltas or any(delta <= 0.0 for delta in measure.deltas):
            self.violations.append(f"measure.deltas: positive values required, found {measure.deltas}")

    def _check_plot(self) -> None:
        if self.experiment.plot.csv_in is None:
            self.violations.append("plot.csv_in: missing")
        if self.experiment.plot.svg_out is None:
            self.violations.append("plot.svg_out: missing")
