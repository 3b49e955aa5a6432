"""
CSV and SVG artifacts for simulation, sweep and regime results.

Every file starts with the resolved run configuration as '#' comment lines,
so outputs describe how they were produced. Floats are written with the
shortest decimal representation that round-trips.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import yaml  # noqa: E402

from ctl_model import STATE_VARIABLES, ProliferationKind  # noqa: E402
from fractional_solver import Trajectory  # noqa: E402
from parameter_sweep import RegimeGrid, SweepGrid  # noqa: E402

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["t", *STATE_VARIABLES]


def format_float(value: float) -> str:
    return np.format_float_positional(value, trim="-")


def trajectory_file_name(kind: ProliferationKind, alpha: float) -> str:
    return f"trajectory_{kind.value}_alpha{alpha:g}.csv"


def _comment_header(config: Optional[Dict[str, Any]], title: str) -> str:
    lines = [f"# {title}"]
    if config:
        echo = yaml.safe_dump(config, sort_keys=False, default_flow_style=False)
        lines.extend(f"# {line}" for line in echo.rstrip().splitlines())
    return "\n".join(lines) + "\n"


def _write_frame(path: Path, frame: pd.DataFrame, header: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(header)
        frame.to_csv(handle, index=False, float_format=format_float, lineterminator="\n")
    logger.info(f"Wrote {path} ({len(frame)} rows)")


def write_trajectory_csv(
    path: Path,
    trajectory: Trajectory,
    kind: ProliferationKind,
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    """Header t,T,I,V,C and one row per grid point."""
    frame = pd.DataFrame(trajectory.states, columns=list(STATE_VARIABLES))
    frame.insert(0, "t", trajectory.times)
    title = f"trajectory kind={kind.value} alpha={trajectory.config.alpha:g}"
    _write_frame(Path(path), frame, _comment_header(config, title))
    return Path(path)


def read_trajectory_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """(times, states) parsed back at full precision."""
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return frame["t"].to_numpy(dtype=float), frame[list(STATE_VARIABLES)].to_numpy(
        dtype=float
    )


def write_sweep_csv(
    path: Path, grid: SweepGrid, config: Optional[Dict[str, Any]] = None
) -> Path:
    """Long format <xname>,<yname>,r0 in y-major order."""
    xs, ys = np.meshgrid(grid.x_values, grid.y_values)
    frame = pd.DataFrame(
        {
            grid.param_x: xs.ravel(),
            grid.param_y: ys.ravel(),
            "r0": grid.values.ravel(),
        }
    )
    title = f"r0 surface x={grid.param_x} y={grid.param_y} alpha=1"
    _write_frame(Path(path), frame, _comment_header(config, title))
    return Path(path)


def write_regime_csv(
    path: Path, grid: RegimeGrid, config: Optional[Dict[str, Any]] = None
) -> Path:
    xs, ys = np.meshgrid(grid.x_values, grid.y_values)
    frame = pd.DataFrame(
        {
            grid.param_x: xs.ravel(),
            grid.param_y: ys.ravel(),
            "r0": grid.r0.ravel(),
            "phi0": grid.phi0.ravel(),
            "regime": [regime.value for row in grid.regimes for regime in row],
        }
    )
    title = f"regime map x={grid.param_x} y={grid.param_y}"
    _write_frame(Path(path), frame, _comment_header(config, title))
    return Path(path)


def render_dynamics_svg(
    path: Path, alpha: float, runs: List[Tuple[ProliferationKind, Trajectory]]
) -> Path:
    """Four panels (T, I, V, C), one line per proliferation law."""
    figure, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    for index, (axis, name) in enumerate(zip(axes.ravel(), STATE_VARIABLES)):
        for kind, trajectory in runs:
            axis.plot(trajectory.times, trajectory.states[:, index], label=kind.value)
        axis.set_title(name)
        axis.grid(True, alpha=0.3)
    for axis in axes[1]:
        axis.set_xlabel("t (days)")
    axes[0, 0].legend()
    figure.suptitle(f"alpha = {alpha:g}")
    figure.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format="svg")
    plt.close(figure)
    logger.info(f"Wrote {path}")
    return Path(path)


def render_surface_svg(path: Path, grid: SweepGrid, log_x: bool, log_y: bool) -> Path:
    """Heatmap of R0 with the R0 = 1 contour."""
    figure, axis = plt.subplots(figsize=(7, 5.5))
    mesh = axis.pcolormesh(grid.x_values, grid.y_values, grid.values, shading="auto")
    if grid.values.min() < 1.0 < grid.values.max():
        axis.contour(
            grid.x_values, grid.y_values, grid.values, levels=[1.0], colors="white"
        )
    figure.colorbar(mesh, ax=axis, label="R0")
    if log_x:
        axis.set_xscale("log")
    if log_y:
        axis.set_yscale("log")
    axis.set_xlabel(grid.param_x)
    axis.set_ylabel(grid.param_y)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format="svg")
    plt.close(figure)
    logger.info(f"Wrote {path}")
    return Path(path)
