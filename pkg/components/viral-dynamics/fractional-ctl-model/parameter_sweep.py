"""
Parameter Sweep Engine

Batch evaluation campaigns over the model:
- R0 surfaces over two swept parameters at alpha = 1
- Regime maps (which equilibria exist) over two swept parameters
- Trajectory suites across proliferation laws and fractional orders

Cells and runs are independent pure computations; they are spread over a
thread pool and written into pre-sized, disjoint slots.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ctl_model import (
    DEFAULT_INITIAL_STATE,
    ModelParams,
    ProliferationKind,
    State,
    simulate,
)
from equilibrium_analysis import Regime, classify_regime, phi0, r0
from fractional_solver import SolverConfig, SolverError, Trajectory

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

SWEEPABLE_PARAMETERS = ("beta", "mu", "c", "N", "lambda")
DEFAULT_WORKERS = 4

# (low, high, count, log-spaced)
DEFAULT_AXES: Dict[str, Tuple[float, float, int, bool]] = {
    "beta": (1e-4, 1.0, 100, True),
    "mu": (1e-3, 1.0, 100, True),
    "c": (0.1, 10.0, 100, True),
    "N": (10.0, 2500.0, 100, False),
    "lambda": (1.0, 100.0, 100, False),
}


class SweepError(ValueError):
    """Invalid sweep request"""

    def __init__(self, message: str, axis: Optional[str] = None):
        self.axis = axis
        super().__init__(f"{message} (axis: {axis})" if axis else message)


class SuiteRunError(SolverError):
    """A trajectory suite run failed"""

    def __init__(self, kind: ProliferationKind, alpha: float, cause: SolverError):
        self.kind = kind
        self.alpha = alpha
        self.cause = cause
        super().__init__(
            f"Run {kind.value} at alpha={alpha} failed: {cause}", cause.step_index
        )


@dataclass(frozen=True)
class AxisSpec:
    """One swept parameter: name, closed range, number of points, spacing"""

    name: str
    low: float
    high: float
    count: int
    log: bool = False

    def __post_init__(self):
        if self.name not in SWEEPABLE_PARAMETERS:
            raise SweepError(
                f"Unknown parameter, expected one of {', '.join(SWEEPABLE_PARAMETERS)}",
                self.name,
            )
        if not (self.low > 0 and self.high > 0):
            raise SweepError(
                f"Range [{self.low}, {self.high}] must be positive", self.name
            )
        if self.count < 2:
            raise SweepError(f"Count {self.count} must be >= 2", self.name)

    @classmethod
    def parse(cls, spec: str) -> "AxisSpec":
        """Parse name:low:high:count[:log]."""
        parts = spec.split(":")
        if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "log"):
            raise SweepError(
                f"Axis spec '{spec}' must look like name:low:high:count[:log]",
                parts[0] if parts else None,
            )
        try:
            low, high, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as e:
            raise SweepError(f"Axis spec '{spec}' is not numeric: {e}", parts[0]) from e
        return cls(parts[0], low, high, count, log=len(parts) == 5)

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.low, self.high, self.count)
        return np.linspace(self.low, self.high, self.count)

    def __str__(self) -> str:
        suffix = ":log" if self.log else ""
        return f"{self.name}:{self.low:g}:{self.high:g}:{self.count}{suffix}"


def default_axis(name: str) -> AxisSpec:
    """Default range of a swept parameter."""
    if name not in DEFAULT_AXES:
        raise SweepError("No default range", name)
    low, high, count, log = DEFAULT_AXES[name]
    return AxisSpec(name, low, high, count, log)


@dataclass
class SweepMetrics:
    cells: int = 0
    workers: int = 0
    elapsed_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cells": self.cells,
            "workers": self.workers,
            "elapsed_seconds": self.elapsed_seconds,
        }


@dataclass
class SweepGrid:
    """Scalar results on a two-parameter grid; values has shape (len(y), len(x))"""

    param_x: str
    x_values: np.ndarray
    param_y: str
    y_values: np.ndarray
    values: np.ndarray
    metrics: SweepMetrics = field(default_factory=SweepMetrics)

    def cell_params(self, base: ModelParams, row: int, column: int) -> ModelParams:
        return base.with_overrides(
            alpha=1.0,
            **{
                self.param_x: self.x_values[column],
                self.param_y: self.y_values[row],
            },
        )


@dataclass
class RegimeGrid:
    """Regime classification per cell with the r0 and phi0 behind it"""

    param_x: str
    x_values: np.ndarray
    param_y: str
    y_values: np.ndarray
    r0: np.ndarray
    phi0: np.ndarray
    regimes: List[List[Regime]]

    def codes(self) -> np.ndarray:
        return np.array([[regime.code for regime in row] for row in self.regimes])


def _check_axes(axis_x: AxisSpec, axis_y: AxisSpec):
    if axis_x.name == axis_y.name:
        raise SweepError("Both axes sweep the same parameter", axis_x.name)


def _fill_rows(n_rows: int, fill_row, workers: int):
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="sweep") as executor:
        # list() re-raises the first worker exception
        list(executor.map(fill_row, range(n_rows)))


def r0_surface(
    base: ModelParams,
    axis_x: AxisSpec,
    axis_y: AxisSpec,
    workers: int = DEFAULT_WORKERS,
) -> SweepGrid:
    """R0 on the Cartesian grid of two parameters, all others from base, alpha = 1."""
    _check_axes(axis_x, axis_y)
    started = time.perf_counter()
    x_values = axis_x.values()
    y_values = axis_y.values()
    grid = SweepGrid(
        param_x=axis_x.name,
        x_values=x_values,
        param_y=axis_y.name,
        y_values=y_values,
        values=np.empty((len(y_values), len(x_values))),
    )

    def fill_row(row: int):
        for column in range(len(x_values)):
            grid.values[row, column] = r0(grid.cell_params(base, row, column))

    _fill_rows(len(y_values), fill_row, workers)

    grid.metrics = SweepMetrics(
        cells=grid.values.size,
        workers=workers,
        elapsed_seconds=time.perf_counter() - started,
    )
    logger.info(
        f"R0 surface over ({axis_x.name}, {axis_y.name}): {grid.metrics.cells} cells "
        f"in {grid.metrics.elapsed_seconds:.3f}s"
    )
    return grid


def regime_map(
    base: ModelParams,
    axis_x: AxisSpec,
    axis_y: AxisSpec,
    workers: int = DEFAULT_WORKERS,
) -> RegimeGrid:
    """Coexistence region: regime of every cell of a two-parameter grid."""
    _check_axes(axis_x, axis_y)
    x_values = axis_x.values()
    y_values = axis_y.values()
    shape = (len(y_values), len(x_values))
    r0_values = np.empty(shape)
    phi0_values = np.empty(shape)
    regimes: List[List[Regime]] = [[Regime.DISEASE_FREE_ONLY] * shape[1] for _ in range(shape[0])]

    def fill_row(row: int):
        for column in range(shape[1]):
            params = base.with_overrides(
                **{axis_x.name: x_values[column], axis_y.name: y_values[row]}
            )
            r0_values[row, column] = r0(params)
            phi0_values[row, column] = phi0(params)
            regimes[row][column] = classify_regime(params)

    _fill_rows(shape[0], fill_row, workers)
    logger.info(
        f"Regime map over ({axis_x.name}, {axis_y.name}): {shape[0] * shape[1]} cells"
    )
    return RegimeGrid(
        param_x=axis_x.name,
        x_values=x_values,
        param_y=axis_y.name,
        y_values=y_values,
        r0=r0_values,
        phi0=phi0_values,
        regimes=regimes,
    )


@dataclass
class SuiteRun:
    kind: ProliferationKind
    alpha: float
    trajectory: Trajectory


@dataclass
class TrajectorySuite:
    """Trajectories sharing parameters, initial condition and grid"""

    params: ModelParams
    initial_state: State
    config: SolverConfig
    runs: List[SuiteRun] = field(default_factory=list)

    def get(self, kind: ProliferationKind, alpha: float) -> Trajectory:
        for run in self.runs:
            if run.kind is kind and run.alpha == alpha:
                return run.trajectory
        raise KeyError(f"No run for {kind.value} at alpha={alpha}")


def trajectory_suite(
    params: ModelParams,
    alphas: Sequence[float],
    kinds: Sequence[ProliferationKind],
    initial_state: State = DEFAULT_INITIAL_STATE,
    config: Optional[SolverConfig] = None,
    workers: int = DEFAULT_WORKERS,
) -> TrajectorySuite:
    """One integration per (kind, alpha) pair, in kinds-major order."""
    config = config or SolverConfig()
    pairs = [(kind, float(alpha)) for kind in kinds for alpha in alphas]
    slots: List[Optional[Trajectory]] = [None] * len(pairs)

    def run(index: int):
        kind, alpha = pairs[index]
        try:
            slots[index] = simulate(
                params.with_overrides(alpha=alpha), kind, initial_state, config
            )
        except SolverError as e:
            logger.error(f"Suite run {kind.value} at alpha={alpha} failed: {e}")
            raise SuiteRunError(kind, alpha, e) from e

    _fill_rows(len(pairs), run, workers)

    suite = TrajectorySuite(params=params, initial_state=initial_state, config=config)
    suite.runs = [
        SuiteRun(kind=kind, alpha=alpha, trajectory=trajectory)
        for (kind, alpha), trajectory in zip(pairs, slots)
    ]
    logger.info(f"Trajectory suite finished: {len(pairs)} runs")
    return suite
