"""
Within-host SARS-CoV-2 / CTL model

Four compartments: healthy target cells T, infected cells I, virions V and
cytotoxic T lymphocytes C, evolving under Caputo derivatives of order alpha.
Rates are stored as base values and raised to alpha when the vector field is
evaluated, so one parameter table serves every order.
"""

import logging
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Any, Dict, Mapping, NamedTuple, Optional

import numpy as np

from fractional_solver import SolverConfig, Trajectory, VectorField, integrate

logger = logging.getLogger(__name__)

STATE_VARIABLES = ("T", "I", "V", "C")
SETTLE_WINDOW = 10.0

# Config and CLI names differ from attribute names only for lambda
PARAMETER_ALIASES = {"lambda": "lam"}


class ParameterError(ValueError):
    """Invalid model parameters or state"""

    def __init__(self, message: str, name: Optional[str] = None):
        self.name = name
        super().__init__(f"{message} (parameter: {name})" if name else message)


class ProliferationKind(Enum):
    """CTL proliferation laws f_n(I, C)"""

    F1 = "f1"  # q^a I C
    F2 = "f2"  # q^a I
    F3 = "f3"  # q^a I C / (eps C + 1)
    F4 = "f4"  # q^a I / (a + eps I)

    @classmethod
    def parse(cls, value: "str | ProliferationKind") -> "ProliferationKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ", ".join(kind.value for kind in cls)
            raise ParameterError(
                f"Unknown proliferation kind '{value}', expected one of {choices}",
                "kind",
            ) from None


@dataclass(frozen=True)
class ModelParams:
    """
    Biological parameters (baseline defaults with N = 100) and the order alpha.

    lam is the proliferation rate of healthy cells (lambda). All eleven
    biological parameters must be strictly positive and 0 < alpha <= 1.
    """

    lam: float = 10.0
    beta: float = 0.001
    mu: float = 0.01
    k: float = 0.7
    delta: float = 1.0
    N: float = 100.0
    c: float = 3.0
    q: float = 0.2
    sigma: float = 0.08
    epsilon: float = 0.01
    a: float = 120.0
    alpha: float = 1.0

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not np.isfinite(value):
                raise ParameterError(f"Value {value} is not finite", item.name)
            if item.name != "alpha" and value <= 0:
                raise ParameterError(f"Value {value} must be positive", item.name)
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(
                f"Order {self.alpha} must satisfy 0 < alpha <= 1", "alpha"
            )

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> "ModelParams":
        """Build from config-style names ("lambda" accepted for lam)."""
        return cls().with_overrides(**values)

    def with_overrides(self, **overrides: Any) -> "ModelParams":
        changes = {}
        known = {item.name for item in fields(self)}
        for name, value in overrides.items():
            attribute = PARAMETER_ALIASES.get(name, name)
            if attribute not in known:
                raise ParameterError("Unknown parameter", name)
            changes[attribute] = float(value)
        return replace(self, **changes)

    def get(self, name: str) -> float:
        attribute = PARAMETER_ALIASES.get(name, name)
        if not hasattr(self, attribute):
            raise ParameterError("Unknown parameter", name)
        return getattr(self, attribute)

    def to_dict(self) -> Dict[str, float]:
        values = asdict(self)
        values["lambda"] = values.pop("lam")
        return values


class EffectiveRates(NamedTuple):
    """Parameters as they enter the equations (rates raised to alpha)."""

    lam: float
    beta: float
    mu: float
    k: float
    delta: float
    N: float
    c: float
    q: float
    sigma: float
    epsilon: float
    a: float


def effective_rates(params: ModelParams) -> EffectiveRates:
    # N, epsilon and a enter unexponentiated, as in the displayed equations
    alpha = params.alpha
    return EffectiveRates(
        lam=params.lam**alpha,
        beta=params.beta**alpha,
        mu=params.mu**alpha,
        k=params.k**alpha,
        delta=params.delta**alpha,
        N=params.N,
        c=params.c**alpha,
        q=params.q**alpha,
        sigma=params.sigma**alpha,
        epsilon=params.epsilon,
        a=params.a,
    )


@dataclass(frozen=True)
class State:
    """One point (T, I, V, C) of the cell/virion concentration space"""

    T: float
    I: float  # noqa: E741
    V: float
    C: float

    def __post_init__(self):
        for name in STATE_VARIABLES:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"State component must be >= 0, got {value}", name)

    @classmethod
    def from_array(cls, values) -> "State":
        T, I, V, C = (float(v) for v in values)  # noqa: E741
        return cls(T, I, V, C)

    def as_array(self) -> np.ndarray:
        return np.array([self.T, self.I, self.V, self.C], dtype=float)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


DEFAULT_INITIAL_STATE = State(T=1000.0, I=0.0, V=10.0, C=333.0)


def _proliferation(kind: ProliferationKind, I: float, C: float, rates: EffectiveRates) -> float:  # noqa: E741
    if kind is ProliferationKind.F1:
        return rates.q * I * C
    if kind is ProliferationKind.F2:
        return rates.q * I
    if kind is ProliferationKind.F3:
        return rates.q * I * C / (rates.epsilon * C + 1.0)
    if kind is ProliferationKind.F4:
        return rates.q * I / (rates.a + rates.epsilon * I)
    raise ParameterError(f"Unsupported proliferation kind {kind}", "kind")


def proliferation(
    kind: ProliferationKind, I: float, C: float, params: ModelParams  # noqa: E741
) -> float:
    """CTL proliferation rate f_n(I, C)."""
    if I < 0 or C < 0:
        raise ParameterError(f"I and C must be >= 0, got I={I}, C={C}")
    return _proliferation(kind, I, C, effective_rates(params))


def _rates(T, I, V, C, rates: EffectiveRates, kind: ProliferationKind):  # noqa: E741
    infection = rates.beta * V * T
    return (
        rates.lam - infection - rates.mu * T,
        infection - rates.k * I * C - rates.delta * I,
        rates.N * rates.delta * I - rates.c * V,
        _proliferation(kind, I, C, rates) - rates.sigma * C,
    )


def rhs(state: State, params: ModelParams, kind: ProliferationKind) -> np.ndarray:
    """Right-hand side (dT, dI, dV, dC) of the fractional system."""
    rates = effective_rates(params)
    return np.array(_rates(state.T, state.I, state.V, state.C, rates, kind))


def vector_field(params: ModelParams, kind: ProliferationKind) -> VectorField:
    """Array form of rhs for the solver; rates are exponentiated once."""
    rates = effective_rates(params)

    def field(t: float, y: np.ndarray) -> np.ndarray:
        T, I, V, C = y  # noqa: E741
        return np.array(_rates(T, I, V, C, rates, kind))

    return field


def boundary_fluxes(
    state: State, params: ModelParams, kind: ProliferationKind
) -> np.ndarray:
    """
    Vector field on each bounding hyperplane of the non-negative orthant:
    dT at T=0, dI at I=0, dV at V=0, dC at C=0. All four are >= 0 for any
    non-negative state, which keeps solutions in the orthant.
    """
    rates = effective_rates(params)
    return np.array(
        [
            rates.lam,
            rates.beta * state.V * state.T,
            rates.N * rates.delta * state.I,
            _proliferation(kind, state.I, 0.0, rates),
        ]
    )


def simulate(
    params: ModelParams,
    kind: ProliferationKind,
    initial_state: State = DEFAULT_INITIAL_STATE,
    config: Optional[SolverConfig] = None,
    hooks=None,
) -> Trajectory:
    """Integrate the model; the solver order follows params.alpha."""
    config = replace(config or SolverConfig(), alpha=params.alpha)
    logger.info(
        f"Simulating {kind.value} at alpha={params.alpha} to t={config.t_end} "
        f"(h={config.step_size})"
    )
    trajectory = integrate(
        vector_field(params, kind), initial_state.as_array(), config, hooks=hooks
    )
    logger.info(
        f"Finished {kind.value} at alpha={params.alpha}: {trajectory.stats.steps} steps "
        f"in {trajectory.stats.elapsed_seconds:.2f}s"
    )
    return trajectory


@dataclass
class TrajectorySummary:
    """Headline quantities of a model trajectory"""

    peak_viral_load: float
    peak_viral_load_time: float
    peak_infected: float
    peak_infected_time: float
    terminal_state: State
    settle_ratios: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["terminal_state"] = self.terminal_state.to_dict()
        return values


def settle_ratios(trajectory: Trajectory, window: float = SETTLE_WINDOW) -> Dict[str, float]:
    """
    Change of each component over the last `window` days, relative to that
    component's largest magnitude on the trajectory. Values near zero mean the
    component has settled; a component that never leaves zero reports 0.
    """
    start = max(float(trajectory.times[-1]) - window, 0.0)
    change = np.abs(trajectory.final_state - trajectory.state_at(start))
    scale = np.max(np.abs(trajectory.states), axis=0)
    ratios = np.divide(change, scale, out=np.zeros_like(change), where=scale > 0)
    return {name: float(value) for name, value in zip(STATE_VARIABLES, ratios)}


def summarize(trajectory: Trajectory) -> TrajectorySummary:
    infected = trajectory.states[:, 1]
    viral = trajectory.states[:, 2]
    i_peak = int(np.argmax(infected))
    v_peak = int(np.argmax(viral))
    # Tiny negative undershoots within tolerance are reported as zero
    terminal = np.clip(trajectory.final_state, 0.0, None)
    return TrajectorySummary(
        peak_viral_load=float(viral[v_peak]),
        peak_viral_load_time=float(trajectory.times[v_peak]),
        peak_infected=float(infected[i_peak]),
        peak_infected_time=float(trajectory.times[i_peak]),
        terminal_state=State.from_array(terminal),
        settle_ratios=settle_ratios(trajectory),
    )
