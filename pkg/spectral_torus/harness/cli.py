"""Command line front-end: `spectral-torus [--config FILE] [--seed N] <subcommand> [flags]`.

Flags override keys of the TOML config file. Exit codes: 0 success, 2 invalid
input, 3 divergence, 4 resonance misroute, 5 file errors.
"""

import argparse
import pathlib
import sys
import typing

import pydantic

from spectral_torus import errors
from spectral_torus.config import config
from spectral_torus.harness import runner
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)


def _float_list(text: str) -> list[float]:
    return [float(item) for item in text.split(",") if item.strip()]


# flag destination -> (section, key) in the experiment config
_OVERRIDES: dict[str, tuple[str, ...]] = {
    "dim": ("operator", "dim"),
    "nu": ("operator", "nu"),
    "m": ("operator", "m"),
    "omega": ("operator", "omega"),
    "f": ("nonlinearity", "f"),
    "domain_radius": ("nonlinearity", "domain_radius"),
    "rho": ("space", "rho"),
    "r": ("space", "r"),
    "cutoff": ("space", "cutoff"),
    "epsilon": ("solver", "epsilon"),
    "radius": ("solver", "radius"),
    "tol": ("solver", "tol"),
    "max_iter": ("solver", "max_iter"),
    "uniqueness_starts": ("solver", "uniqueness_starts"),
    "out": ("outputs", "field"),
    "report": ("outputs", "report"),
    "delta": ("scan", "delta"),
    "scan_kmax": ("scan", "kmax"),
    "scan_out": ("outputs", "scan"),
    "m0": ("bifurcation", "m0"),
    "eps_range": ("bifurcation", "eps_range"),
    "phase": ("bifurcation", "phase"),
    "verify": ("bifurcation", "verify"),
    "bifurcation_kmax": ("bifurcation", "kmax"),
    "out_csv": ("outputs", "bifurcation_csv"),
    "cm_epsilon": ("center_manifold", "epsilon"),
    "theta_modes": ("center_manifold", "manifold", "theta_modes"),
    "z0": ("center_manifold", "z0"),
    "t_final": ("center_manifold", "t_final"),
    "jet_out": ("outputs", "jet"),
    "ode_out": ("outputs", "ode"),
    "residual_report": ("outputs", "residual_report"),
    "measure_dim": ("measure", "dim"),
    "measure_m": ("measure", "m"),
    "deltas": ("measure", "deltas"),
    "samples": ("measure", "samples"),
    "measure_kmax": ("measure", "kmax"),
    "measure_out": ("outputs", "measure_csv"),
    "csv_in": ("plot", "csv_in"),
    "svg_out": ("plot", "svg_out"),
}


def _add_operator(parser: argparse.ArgumentParser, evolution: bool) -> None:
    parser.add_argument("--dim", type=int, help="Spatial dimension d.")
    parser.add_argument("--nu", type=_float_list, help="Comma list of nu_i in [1, 2].")
    parser.add_argument("--m", type=float, help="Mass parameter m.")
    parser.add_argument(
        "--omega",
        type=_float_list,
        help="Comma list of frequencies." + ("" if evolution else " Switches to the evolution problem."),
    )


def _add_space(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rho", type=float, help="Analyticity width rho.")
    parser.add_argument("--r", type=float, help="Sobolev exponent r.")
    parser.add_argument("--cutoff", type=int, help="Per-axis Fourier cutoff K.")


def _add_solve(parser: argparse.ArgumentParser, evolution: bool) -> None:
    _add_operator(parser, evolution)
    _add_space(parser)
    parser.add_argument("--f", type=str, help="Nonlinearity, e.g. 'u**2 + cos(x)'.")
    parser.add_argument("--domain-radius", dest="domain_radius", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--radius", type=float, help="Radius s of the ball B_s(0).")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--uniqueness-starts", dest="uniqueness_starts", type=int)
    parser.add_argument("--out", type=str, help="Field file name.")
    parser.add_argument("--report", type=str, help="CSV report file name.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-torus",
        description="Spectral Galerkin solvers for nonlinear elliptic equations on tori.",
    )
    parser.add_argument("--config", type=pathlib.Path, help="Experiment TOML file.")
    parser.add_argument("--seed", type=int, help="Seed of every random draw.")
    parser.add_argument("--out-dir", dest="out_dir", type=pathlib.Path)
    parser.add_argument("--verbose", action="store_true", default=None)
    commands = parser.add_subparsers(dest="scenario", required=True)

    _add_solve(commands.add_parser("solve", help="Nonresonant fixed-point solve."), False)
    _add_solve(commands.add_parser("evolution", help="Response solution of the evolution problem."), True)

    scan = commands.add_parser("scan", help="Resonance scan of an operator.")
    _add_operator(scan, False)
    scan.add_argument("--delta", type=float)
    scan.add_argument("--kmax", dest="scan_kmax", type=int)
    scan.add_argument("--out", dest="scan_out", type=str)

    bifurcate = commands.add_parser("bifurcate", help="Bifurcating branches at a resonant m0.")
    bifurcate.add_argument("--dim", type=int)
    bifurcate.add_argument("--nu", type=_float_list)
    bifurcate.add_argument("--m0", type=float)
    bifurcate.add_argument(
        "--eps-range",
        dest="eps_range",
        type=str,
        help="start:stop:count or a comma list. Write negative values with '=', e.g. --eps-range=-1e-2:-1e-4:9.",
    )
    bifurcate.add_argument(
        "--phase", type=_float_list, help="Comma list of shifts; negative values need '=', e.g. --phase=-0.5,1."
    )
    bifurcate.add_argument("--kmax", dest="bifurcation_kmax", type=int)
    bifurcate.add_argument("--out-csv", dest="out_csv", type=str)
    bifurcate.add_argument("--verify", action="store_true", default=None)

    manifold = commands.add_parser("center-manifold", help="Quadratic center-manifold jet.")
    _add_operator(manifold, True)
    _add_space(manifold)
    manifold.add_argument("--f", type=str)
    manifold.add_argument("--epsilon", dest="cm_epsilon", type=float)
    manifold.add_argument("--theta-modes", dest="theta_modes", type=int)
    manifold.add_argument("--z0", type=_float_list, help="Initial center coordinates of the reduced ODE.")
    manifold.add_argument("--t-final", dest="t_final", type=float)
    manifold.add_argument("--jet-out", dest="jet_out", type=str)
    manifold.add_argument("--ode-out", dest="ode_out", type=str)
    manifold.add_argument("--residual-report", dest="residual_report", type=str)

    measure = commands.add_parser("measure-sweep", help="Measure of the excluded nu set over a delta grid.")
    measure.add_argument("--dim", dest="measure_dim", type=int)
    measure.add_argument("--m", dest="measure_m", type=float)
    measure.add_argument("--deltas", type=_float_list)
    measure.add_argument("--samples", type=int)
    measure.add_argument("--kmax", dest="measure_kmax", type=int)
    measure.add_argument("--out-csv", dest="measure_out", type=str)

    plot = commands.add_parser("plot", help="SVG bifurcation diagram from a bifurcate CSV.")
    plot.add_argument("--csv-in", dest="csv_in", type=pathlib.Path)
    plot.add_argument("--svg-out", dest="svg_out", type=pathlib.Path)
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict[str, typing.Any]:
    """Nested config mapping of every flag that was given."""
    overrides: dict[str, typing.Any] = {"scenario": args.scenario}
    for name in ("seed", "out_dir", "verbose"):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    for name, path in _OVERRIDES.items():
        value = getattr(args, name, None)
        if value is None:
            continue
        target = overrides
        for key in path[:-1]:
            target = target.setdefault(key, {})
        target[path[-1]] = value
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.set_level("DEBUG")
    try:
        experiment = config.load_experiment_config(args.config, overrides_from_args(args))
    except pydantic.ValidationError as exc:
        log.error(f"invalid config: {exc}")
        return errors.ValidationError.exit_code
    except OSError as exc:
        log.error(f"cannot read config: {exc}")
        return errors.ReportIOError.exit_code
    return runner.run(experiment)


if __name__ == "__main__":
    sys.exit(main())
