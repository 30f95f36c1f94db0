import typing

from spectral_torus import errors
from spectral_torus.models import models
from spectral_torus.utils import logger

log = logger.setup_logger(__name__)

DIVERGENCE_WINDOW = 5


class PicardOutcome(typing.NamedTuple):
    solution: models.SpectralField
    iterations: int
    contraction_estimate: float
    step_history: list[float]


def picard_iterate(
    step: typing.Callable[[models.SpectralField], models.SpectralField],
    start: models.SpectralField,
    norm: typing.Callable[[models.SpectralField], float],
    ball_radius: float,
    tol: float,
    max_iter: int,
) -> PicardOutcome:
    """Iterates u <- step(u) from `start`.

    Stops once ||u_{n+1} - u_n|| <= tol (1 - kappa) / kappa, which bounds the
    distance to the fixed point by tol. kappa is the largest ratio of
    consecutive step sizes over the last DIVERGENCE_WINDOW steps.

    Raises:
        BallEscapeError: an iterate has norm above ball_radius.
        PicardDivergenceError: DIVERGENCE_WINDOW consecutive step ratios >= 1.
        MaxIterationsError: no convergence within max_iter steps.
    """
    u = start
    steps: list[float] = []
    ratios: list[float] = []
    kappa = 0.0
    for iteration in range(1, max_iter + 1):
        u_next = step(u)
        size = norm(u_next)
        if size > ball_radius:
            raise errors.BallEscapeError(iteration, size, ball_radius)
        distance = norm(u_next - u)
        u = u_next
        if steps:
            ratios.append(distance / steps[-1] if steps[-1] > 0.0 else 0.0)
        steps.append(distance)
        if distance == 0.0:
            log.debug(f"exact fixed point after {iteration} iteration(s)")
            return PicardOutcome(u, iteration, kappa, steps)

        recent = ratios[-DIVERGENCE_WINDOW:]
        if len(recent) == DIVERGENCE_WINDOW and min(recent) >= 1.0:
            raise errors.PicardDivergenceError(iteration, recent)
        if not recent:
            continue
        kappa = max(recent)
        log.debug(f"{iteration=}, {distance=:.3e}, {kappa=:.3f}")
        if kappa < 1.0 and distance <= tol * (1.0 - kappa) / max(kappa, 1e-300):
            log.info(f"Picard iteration converged after {iteration} iterations, {kappa=:.3e}")
            return PicardOutcome(u, iteration, kappa, steps)
    raise errors.MaxIterationsError(max_iter, steps[-1] if steps else 0.0)
