"""
Equilibrium and threshold analysis

Closed-form steady states of the model with the mass-action proliferation law
f_1, the basic reproduction number R0, the coexistence threshold phi0 and the
normalized sensitivity indices of R0.

- X0 (disease-free) always exists
- X1 (CTL-response-free) exists iff R0 > 1
- X2 (endemic) exists iff R0 > phi0, and phi0 > 1 so X2 implies X1
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ctl_model import (
    ModelParams,
    ParameterError,
    ProliferationKind,
    State,
    effective_rates,
    rhs,
)

logger = logging.getLogger(__name__)

SENSITIVITY_PARAMETERS = ("beta", "lambda", "N", "mu", "c")
FINITE_DIFFERENCE_STEP = 1e-6
# Relative band around a threshold that counts as a tie
THRESHOLD_TIE_TOLERANCE = 1e-12


class EquilibriumNotDerivedError(ParameterError):
    """Closed-form equilibria exist only for the f1 proliferation law"""

    def __init__(self, kind: ProliferationKind):
        self.kind = kind
        super().__init__(
            f"Equilibria are derived for f1 only, not for {kind.value}", "kind"
        )


class Regime(Enum):
    """Which equilibria exist"""

    DISEASE_FREE_ONLY = "DiseaseFreeOnly"
    CTL_FREE_EXISTS = "CtlFreeExists"
    COEXISTENCE = "Coexistence"

    @property
    def code(self) -> int:
        return list(Regime).index(self)


def r0(params: ModelParams) -> float:
    """Basic reproduction number beta^a lambda^a N / (mu^a c^a)."""
    rates = effective_rates(params)
    return rates.beta * rates.lam * rates.N / (rates.mu * rates.c)


def phi0(params: ModelParams) -> float:
    """Coexistence threshold 1 + sigma^a N beta^a delta^a / (q^a c^a mu^a)."""
    rates = effective_rates(params)
    return 1.0 + (rates.sigma * rates.N * rates.beta * rates.delta) / (
        rates.q * rates.c * rates.mu
    )


def next_generation_r0(params: ModelParams) -> float:
    """
    R0 as the spectral radius of F V^-1 for the infected subsystem (I, V)
    linearized at the disease-free equilibrium.
    """
    rates = effective_rates(params)
    t0 = rates.lam / rates.mu
    new_infections = np.array([[0.0, rates.beta * t0], [0.0, 0.0]])
    transitions = np.array([[rates.delta, 0.0], [-rates.N * rates.delta, rates.c]])
    eigenvalues = np.linalg.eigvals(new_infections @ np.linalg.inv(transitions))
    return float(np.max(np.abs(eigenvalues)))


def _exceeds(value: float, threshold: float) -> bool:
    return value > threshold * (1.0 + THRESHOLD_TIE_TOLERANCE)


def _require_f1(kind: ProliferationKind):
    if kind is not ProliferationKind.F1:
        raise EquilibriumNotDerivedError(kind)


def disease_free_equilibrium(params: ModelParams) -> State:
    rates = effective_rates(params)
    return State(T=rates.lam / rates.mu, I=0.0, V=0.0, C=0.0)


def ctl_free_equilibrium(
    params: ModelParams, kind: ProliferationKind = ProliferationKind.F1
) -> Optional[State]:
    """X1, or None when R0 <= 1."""
    _require_f1(kind)
    if not _exceeds(r0(params), 1.0):
        return None
    rates = effective_rates(params)
    excess = rates.N * rates.beta * rates.lam - rates.c * rates.mu
    if excess <= 0.0:
        return None
    return State(
        T=rates.c / (rates.N * rates.beta),
        I=excess / (rates.N * rates.beta * rates.delta),
        V=excess / (rates.beta * rates.c),
        C=0.0,
    )


def endemic_equilibrium(
    params: ModelParams, kind: ProliferationKind = ProliferationKind.F1
) -> Optional[State]:
    """X2, or None when R0 <= phi0."""
    _require_f1(kind)
    if not _exceeds(r0(params), phi0(params)):
        return None
    rates = effective_rates(params)
    burst_term = rates.sigma * rates.N * rates.beta * rates.delta
    denominator = burst_term + rates.c * rates.mu * rates.q
    b = rates.delta / (denominator * rates.k)
    excess = rates.N * rates.beta * rates.lam - rates.c * rates.mu
    c2 = b * (rates.q * excess - burst_term)
    if c2 <= 0.0:
        return None
    return State(
        T=rates.lam * rates.c * rates.q / denominator,
        I=rates.sigma / rates.q,
        V=rates.N * rates.delta * rates.sigma / (rates.q * rates.c),
        C=c2,
    )


def classify_regime(params: ModelParams) -> Regime:
    """Ties go to the lower regime."""
    reproduction = r0(params)
    if not _exceeds(reproduction, 1.0):
        return Regime.DISEASE_FREE_ONLY
    if not _exceeds(reproduction, phi0(params)):
        return Regime.CTL_FREE_EXISTS
    return Regime.COEXISTENCE


def residual_norm(state: State, params: ModelParams) -> float:
    """Max-norm of the f1 vector field at state."""
    return float(np.max(np.abs(rhs(state, params, ProliferationKind.F1))))


@dataclass
class EquilibriumReport:
    """Equilibria, thresholds and regime for one parameter set"""

    x0: State
    x1: Optional[State]
    x2: Optional[State]
    r0: float
    phi0: float
    regime: Regime
    residuals: Dict[str, float] = field(default_factory=dict)

    def equilibria(self) -> Dict[str, State]:
        present = {"x0": self.x0, "x1": self.x1, "x2": self.x2}
        return {name: state for name, state in present.items() if state is not None}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r0": self.r0,
            "phi0": self.phi0,
            "regime": self.regime.value,
            "equilibria": {
                name: state.to_dict() for name, state in self.equilibria().items()
            },
            "residuals": dict(self.residuals),
        }


def equilibrium_report(
    params: ModelParams, kind: ProliferationKind = ProliferationKind.F1
) -> EquilibriumReport:
    _require_f1(kind)
    report = EquilibriumReport(
        x0=disease_free_equilibrium(params),
        x1=ctl_free_equilibrium(params),
        x2=endemic_equilibrium(params),
        r0=r0(params),
        phi0=phi0(params),
        regime=classify_regime(params),
    )
    report.residuals = {
        name: residual_norm(state, params)
        for name, state in report.equilibria().items()
    }
    logger.debug(f"Equilibrium report: {report.to_dict()}")
    return report


@dataclass
class SensitivityReport:
    """Normalized sensitivity indices of R0 keyed by parameter name"""

    indices: Dict[str, float]

    def sign(self, name: str) -> str:
        return "+" if self.indices[name] > 0 else "-"

    def to_dict(self) -> Dict[str, float]:
        return dict(self.indices)


def sensitivity_indices(params: ModelParams) -> SensitivityReport:
    """
    Indices (dR0/dp)(p/R0) with respect to the base parameters. R0 is a
    monomial in them, so each index is its exponent.
    """
    alpha = params.alpha
    return SensitivityReport(
        indices={
            "beta": alpha,
            "lambda": alpha,
            "N": 1.0,
            "mu": -alpha,
            "c": -alpha,
        }
    )


def finite_difference_indices(
    params: ModelParams, relative_step: float = FINITE_DIFFERENCE_STEP
) -> SensitivityReport:
    """Central-difference estimates of the indices returned by sensitivity_indices."""
    base = r0(params)
    indices = {}
    for name in SENSITIVITY_PARAMETERS:
        value = params.get(name)
        step = relative_step * value
        upper = r0(params.with_overrides(**{name: value + step}))
        lower = r0(params.with_overrides(**{name: value - step}))
        indices[name] = (upper - lower) / (2.0 * step) * value / base
    return SensitivityReport(indices=indices)
