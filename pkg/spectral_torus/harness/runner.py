"""Scenario dispatch: one experiment config in, artifacts under out_dir, an exit code back."""

import pathlib
import typing

import pydantic

from spectral_torus import errors
from spectral_torus.config import config
from spectral_torus.harness import plotting
from spectral_torus.harness import reports
from spectral_torus.manifold import center_manifold
from spectral_torus.models import models
from spectral_torus.models import validation
from spectral_torus.operators import linear_ops
from spectral_torus.solvers import bifurcation
from spectral_torus.solvers import elliptic_solver
from spectral_torus.spectral import expressions
from spectral_torus.spectral import field_io
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

Results = dict[str, typing.Any]


def _output(experiment: config.ExperimentConfig, name: str) -> pathlib.Path:
    return experiment.out_dir / getattr(experiment.outputs, name)


def _operator_spec(experiment: config.ExperimentConfig) -> models.OperatorSpec:
    operator = experiment.operator
    m = operator.m
    if operator.omega:
        return models.EvolutionOperatorSpec(nu=tuple(operator.nu), m=m, omega=tuple(operator.omega))
    return models.EllipticOperatorSpec(nu=tuple(operator.nu), m=m)


def _nonlinearity(experiment: config.ExperimentConfig) -> expressions.ScalarFunctionSpec:
    section = experiment.nonlinearity
    return expressions.ScalarFunctionSpec(expression=section.f, domain_radius=section.domain_radius)


def _space(experiment: config.ExperimentConfig) -> models.SpaceParams:
    return models.SpaceParams(rho=experiment.space.rho, r=experiment.space.r)


def _run_solve(experiment: config.ExperimentConfig) -> Results:
    spec = _operator_spec(experiment)
    f = _nonlinearity(experiment)
    solver = experiment.solver
    cfg = models.SolveConfig(
        epsilon=solver.epsilon,
        ball_radius=solver.radius,
        tol=solver.tol,
        max_iter=solver.max_iter,
        space=_space(experiment),
        cutoff=experiment.space.cutoff,
        lip_samples=solver.lip_samples,
        seed=experiment.seed,
    )
    if experiment.scenario == "evolution":
        result = elliptic_solver.solve_evolution(spec, f, cfg)
    else:
        result = elliptic_solver.solve_elliptic(spec, f, cfg)
    spread = float("nan")
    if solver.uniqueness_starts:
        spread = elliptic_solver.probe_uniqueness(
            spec, f, cfg, result.solution, solver.uniqueness_starts, experiment.verbose
        )
    field_io.write_field(result.solution, _output(experiment, "field"), cfg.space)
    row = {
        "dim": spec.dim,
        "nu": ",".join(format(nu_i, ".17g") for nu_i in spec.nu),
        "m": spec.m,
        "omega": ",".join(format(o, ".17g") for o in experiment.operator.omega or []),
        "f": f.expression,
        "epsilon": cfg.epsilon,
        "radius": cfg.ball_radius,
        "rho": cfg.space.rho,
        "r": cfg.space.r,
        "cutoff": cfg.cutoff,
        "seed": cfg.seed,
        "iterations": result.iterations,
        "residual": result.residual,
        "contraction": result.contraction_estimate,
        "epsilon_star": result.epsilon_star,
        "outside_certified_regime": result.outside_certified_regime,
        "uniqueness_spread": spread,
    }
    reports.append_rows(_output(experiment, "report"), [row], reports.SOLVE_COLUMNS)
    log.info(f"solved with residual={result.residual:.3e} after {result.iterations} iterations")
    return row


def _run_scan(experiment: config.ExperimentConfig) -> Results:
    spec = _operator_spec(experiment)
    report = linear_ops.resonance_scan(spec, experiment.scan.delta, kmax=experiment.scan.kmax)
    reports.write_text(_output(experiment, "scan"), report.to_text())
    return report.model_dump(mode="json")


def _run_bifurcate(experiment: config.ExperimentConfig) -> Results:
    section = experiment.bifurcation
    m0 = section.m0 if section.m0 is not None else experiment.operator.m
    basis = bifurcation.kernel_basis(experiment.operator.nu, m0, kmax=section.kmax)
    data, rows = bifurcation.branch_sweep(
        basis, section.eps_range, section.phase, section.newton, experiment.verbose
    )
    reports.append_rows(
        _output(experiment, "bifurcation_csv"),
        [row._asdict() for row in rows],
        reports.BIFURCATION_COLUMNS,
    )
    results: Results = {
        "kernel_modes": basis.modes,
        "A": data.A,
        "B": data.B,
        "M": data.M,
        "sigma": data.sigma,
        "printed_M": data.printed_M,
        "branches": sum(row.exists for row in rows),
    }
    if section.verify:
        branch = data.branches[0] if data.branches else None
        eps_m = branch.eps_m if branch is not None else section.eps_range[0]
        verification = bifurcation.branch_verify(basis, eps_m, branch)
        reports.write_text(_output(experiment, "verify_report"), verification.to_text())
        print(verification.to_text(), end="")
        results["verification"] = verification.model_dump(mode="json")
    return results


def _run_center_manifold(experiment: config.ExperimentConfig) -> Results:
    section = experiment.center_manifold
    spec = _operator_spec(experiment)
    system = center_manifold.prepare_system(
        spec,
        _nonlinearity(experiment),
        section.epsilon,
        experiment.space.cutoff,
        section.manifold,
        section.quadrature,
    )
    outcome = center_manifold.compute_manifold(system, experiment.verbose)
    field_io.write_jet(outcome.jet, _output(experiment, "jet"))

    sweep = center_manifold.invariance_sweep(
        outcome.jet,
        system,
        section.radii,
        section.samples,
        experiment.seed,
        section.step,
        experiment.verbose,
        _space(experiment),
    )
    reports.append_rows(
        _output(experiment, "residual_report"),
        [
            {
                "radius": sample.radius,
                "residual": sample.residual,
                "samples": section.samples,
                "seed": experiment.seed,
                "step": section.step,
            }
            for sample in sweep
        ],
        reports.INVARIANCE_COLUMNS,
    )

    z0 = section.z0 if section.z0 is not None else [0.0] * system.n_center
    trajectory = center_manifold.integrate_reduced_ode(
        outcome.jet, system, z0, section.t_final, section.ode_points
    )
    columns = ["t"] + [f"z{a + 1}" for a in range(system.n_center)]
    reports.append_rows(
        _output(experiment, "ode"),
        [dict(zip(columns, [t, *state])) for t, state in zip(trajectory.times, trajectory.states)],
        columns,
    )
    splitting = system.splitting
    return {
        "n_center": system.n_center,
        "n_hyperbolic": len(system.hyperbolic),
        "beta1": splitting.beta1,
        "beta2": splitting.beta2,
        "updates": outcome.updates,
        "max_contraction_ratio": max(outcome.contraction_ratios, default=0.0),
        "jet_size": outcome.jet.size(),
        "residuals": [sample.residual for sample in sweep],
        "residual_slope": reports.fit_loglog_slope(
            [sample.radius for sample in sweep], [sample.residual for sample in sweep]
        ),
        "verified_on": "truncated prepared system",
    }


def _run_measure_sweep(experiment: config.ExperimentConfig) -> Results:
    section = experiment.measure
    dim = section.dim or experiment.operator.dim or len(experiment.operator.nu or [])
    m = section.m if section.m is not None else experiment.operator.m
    estimates = [
        linear_ops.excluded_measure_estimate(
            dim, m, delta, kmax=section.kmax, samples=section.samples, seed=experiment.seed
        )
        for delta in section.deltas
    ]
    rows = [
        {
            "delta": estimate.delta,
            "analytic_bound": estimate.analytic_bound,
            "mc_estimate": estimate.monte_carlo,
            "mc_stderr": estimate.stderr,
            "seed": estimate.seed,
        }
        for estimate in estimates
    ]
    reports.append_rows(_output(experiment, "measure_csv"), rows, reports.MEASURE_COLUMNS)
    return {
        "mc_slope": reports.fit_loglog_slope(section.deltas, [row["mc_estimate"] for row in rows]),
        "bound_slope": reports.fit_loglog_slope(section.deltas, [row["analytic_bound"] for row in rows]),
        "within_bound": all(
            row["mc_estimate"] <= row["analytic_bound"] + 3.0 * row["mc_stderr"] for row in rows
        ),
    }


def _run_plot(experiment: config.ExperimentConfig) -> Results:
    plotting.emit_bifurcation_diagram(experiment.plot.csv_in, experiment.plot.svg_out)
    return {"svg": str(experiment.plot.svg_out)}


SCENARIOS: dict[str, typing.Callable[[config.ExperimentConfig], Results]] = {
    "solve": _run_solve,
    "evolution": _run_solve,
    "scan": _run_scan,
    "bifurcate": _run_bifurcate,
    "center-manifold": _run_center_manifold,
    "measure-sweep": _run_measure_sweep,
    "plot": _run_plot,
}


def execute(experiment: config.ExperimentConfig) -> Results:
    """Validates and runs one scenario, writing its artifacts and summary.json.

    Raises:
        SpectralTorusError: any library error; its exit_code is what `run` returns.
    """
    validation.validate_experiment(experiment)
    log.info(f"running scenario {experiment.scenario} with seed={experiment.seed}")
    results = SCENARIOS[experiment.scenario](experiment)
    if experiment.scenario != "plot":
        reports.write_summary(
            _output(experiment, "summary"),
            experiment.model_dump(mode="json"),
            {"scenario": experiment.scenario, **results},
        )
    return results


def run(experiment: config.ExperimentConfig) -> int:
    """Runs an experiment and maps failures to the documented exit codes."""
    try:
        execute(experiment)
    except errors.SpectralTorusError as exc:
        log.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except pydantic.ValidationError as exc:
        log.error(f"invalid parameters: {exc}")
        return errors.ValidationError.exit_code
    except OSError as exc:
        log.error(f"file error: {exc}")
        return errors.ReportIOError.exit_code
    return 0

