import pathlib

import matplotlib

matplotlib.use("Agg")
# fixed ids keep reruns byte-identical
matplotlib.rcParams["svg.hashsalt"] = "spectral-torus"

import matplotlib.pyplot as plt  # noqa: E402

from spectral_torus.harness import reports  # noqa: E402
from spectral_torus.utils import logger  # noqa: E402

log = logger.setup_logger(__name__)

_REQUIRED = ["eps_m", "branch_norm", "sigma"]


def emit_bifurcation_diagram(csv_in: pathlib.Path, svg_out: pathlib.Path) -> None:
    """Plots branch_norm against eps_m for the rows where a branch exists, plus the
    trivial branch, and writes a static SVG.

    Raises:
        MalformedReportError: the CSV lacks eps_m, branch_norm or sigma.
    """
    frame = reports.read_report(csv_in, _REQUIRED)
    figure, axes = plt.subplots(figsize=(6.0, 4.0))
    if not frame.empty:
        if "exists" in frame.columns:
            existing = frame[frame["exists"].astype(str).str.lower() == "true"]
        else:
            existing = frame[frame["branch_norm"] > 0.0]
        existing = existing.sort_values("eps_m")
        sigma = int(frame["sigma"].iloc[0])
        low, high = float(frame["eps_m"].min()), float(frame["eps_m"].max())
        axes.plot([min(low, 0.0), max(high, 0.0)], [0.0, 0.0], color="gray", linewidth=1.0, label="u = 0")
        axes.plot(existing["eps_m"], existing["branch_norm"], "o-", label="nontrivial branch")
        side = "eps_m > 0" if sigma > 0 else "eps_m < 0"
        axes.set_title(f"sigma = {sigma:+d}: branches for {side}")
        axes.legend()
    axes.set_xlabel("eps_m")
    axes.set_ylabel("branch norm")
    svg_out.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(svg_out, format="svg", metadata={"Date": None})
    plt.close(figure)
    log.info(f"wrote bifurcation diagram {svg_out}")
