"""
Numerical validation checks for the solver and the analysis.

Each check records what was measured and what was allowed. The suite backs
the `validate` command and can run with solver hooks to inject faults.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erfc

from ctl_model import (
    DEFAULT_INITIAL_STATE,
    ModelParams,
    ProliferationKind,
    State,
    boundary_fluxes,
    simulate,
    vector_field,
)
from equilibrium_analysis import (
    equilibrium_report,
    finite_difference_indices,
    sensitivity_indices,
)
from fractional_solver import (
    SolverConfig,
    SolverError,
    SolverHook,
    integrate,
    mittag_leffler,
    mittag_leffler_relaxation,
)

logger = logging.getLogger(__name__)

ORACLE_ALPHAS = (0.5, 0.92, 0.96, 1.0)
CONVERGENCE_STEP = 0.02
CONVERGENCE_LEVELS = 4
ACCURACY_STEP = 1e-3
ACCURACY_TOLERANCE = 1e-6
MODEL_STEP = 1e-3
MODEL_REFINEMENTS = 4
MODEL_HORIZON = 50.0
MODEL_TOLERANCE = 1e-4
RESIDUAL_TOLERANCE = 1e-10
SENSITIVITY_TOLERANCE = 1e-6
RANDOM_SAMPLES = 1000
RANDOM_SEED = 20200


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    measured: float
    allowed: float
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "allowed": self.allowed,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    checks: List[ValidationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[ValidationCheck]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }


class WeightPerturbationHook(SolverHook):
    """Scales the corrector weights; used to check that faults are detected."""

    def __init__(self, factor: float):
        self.factor = factor

    def on_weights(self, step_index, predictor, corrector):
        return predictor, corrector * self.factor


def random_parameters(rng: np.random.Generator) -> ModelParams:
    """Log-uniform rates, N across its reported range, alpha in [0.5, 1]."""

    def log_uniform(low: float, high: float) -> float:
        return float(np.exp(rng.uniform(np.log(low), np.log(high))))

    return ModelParams(
        lam=log_uniform(1.0, 100.0),
        beta=log_uniform(1e-4, 1e-1),
        mu=log_uniform(1e-3, 1.0),
        k=log_uniform(0.1, 10.0),
        delta=log_uniform(0.1, 10.0),
        N=float(rng.uniform(10.0, 2500.0)),
        c=log_uniform(0.1, 10.0),
        q=log_uniform(0.01, 1.0),
        sigma=log_uniform(0.01, 1.0),
        epsilon=log_uniform(1e-3, 1e-1),
        a=log_uniform(10.0, 1000.0),
        alpha=float(rng.uniform(0.5, 1.0)),
    )


def relaxation_error(
    alpha: float, step_size: float, hooks: Optional[List[SolverHook]] = None
) -> float:
    """Max-norm error of ABM on D^alpha y = -y, y(0) = 1 over [0, 1]."""
    config = SolverConfig(alpha=alpha, step_size=step_size, t_end=1.0)
    trajectory = integrate(
        lambda t, y: -y,
        [1.0],
        config,
        hooks=hooks,
    )
    exact = mittag_leffler_relaxation(alpha, trajectory.times)
    return float(np.max(np.abs(trajectory.states[:, 0] - exact)))


def reference_solution(
    params: ModelParams,
    kind: ProliferationKind,
    initial_state: State,
    t_end: float,
) -> np.ndarray:
    """State at t_end from a classical Runge-Kutta 4(5) integration (alpha = 1)."""
    field_fn = vector_field(params.with_overrides(alpha=1.0), kind)
    solution = solve_ivp(
        field_fn,
        (0.0, t_end),
        initial_state.as_array(),
        method="RK45",
        rtol=1e-12,
        # I and V fall far below any fixed floor before the rebound
        atol=1e-30,
    )
    if not solution.success:
        raise SolverError(f"Reference integration failed: {solution.message}")
    return solution.y[:, -1]


def check_mittag_leffler_identities() -> List[ValidationCheck]:
    exponential = abs(mittag_leffler(1.0, 1.0) - math.e)
    half = abs(mittag_leffler(0.5, -1.0) - math.e * erfc(1.0))
    return [
        ValidationCheck("mittag_leffler_exponential", exponential <= 1e-12, exponential, 1e-12),
        ValidationCheck("mittag_leffler_erfc", half <= 1e-10, half, 1e-10),
    ]


def check_oracle_convergence(
    step_size: float = CONVERGENCE_STEP,
    alphas: Sequence[float] = ORACLE_ALPHAS,
    hooks: Optional[List[SolverHook]] = None,
) -> List[ValidationCheck]:
    checks = []
    steps = [step_size / 2**level for level in range(CONVERGENCE_LEVELS)]
    for alpha in alphas:
        try:
            errors = [relaxation_error(alpha, h, hooks) for h in steps]
        except SolverError as e:
            checks.append(
                ValidationCheck(f"oracle_convergence_alpha{alpha:g}", False, math.inf, 0.0, str(e))
            )
            continue
        decreasing = all(later < earlier for earlier, later in zip(errors, errors[1:]))
        ratio = max(later / earlier for earlier, later in zip(errors, errors[1:]))
        checks.append(
            ValidationCheck(
                f"oracle_convergence_alpha{alpha:g}",
                decreasing,
                ratio,
                1.0,
                "errors " + ", ".join(f"{error:.3e}" for error in errors),
            )
        )
    return checks


def check_classical_accuracy(
    step_size: float = ACCURACY_STEP, hooks: Optional[List[SolverHook]] = None
) -> ValidationCheck:
    try:
        error = relaxation_error(1.0, step_size, hooks)
    except SolverError as e:
        return ValidationCheck("oracle_accuracy_alpha1", False, math.inf, ACCURACY_TOLERANCE, str(e))
    return ValidationCheck(
        "oracle_accuracy_alpha1",
        error <= ACCURACY_TOLERANCE,
        error,
        ACCURACY_TOLERANCE,
        f"h={step_size:g}",
    )


def check_model_equivalence(
    horizon: float = MODEL_HORIZON,
    step_size: float = MODEL_STEP,
    refinements: int = MODEL_REFINEMENTS,
    hooks: Optional[List[SolverHook]] = None,
) -> ValidationCheck:
    """
    ABM at alpha = 1 against the classical reference for the baseline run.

    The baseline infection is driven down by many orders of magnitude before it
    rebounds, and the state after the rebound shifts with the rebound time, so
    agreement at t = 50 is far more sensitive to the step than the local
    error suggests. The step is halved up to `refinements` times; the check
    passes at the first step that meets the tolerance and reports every error
    it measured.
    """
    params = ModelParams()
    steps = [step_size / 2**level for level in range(refinements + 1)]
    references: Dict[float, np.ndarray] = {}
    errors: List[str] = []
    error = math.inf
    for h in steps:
        config = SolverConfig(alpha=1.0, step_size=h, t_end=horizon)
        try:
            trajectory = simulate(
                params, ProliferationKind.F1, DEFAULT_INITIAL_STATE, config, hooks=hooks
            )
        except SolverError as e:
            errors.append(f"h={h:g}: {e}")
            continue
        t_final = float(trajectory.times[-1])
        if t_final not in references:
            references[t_final] = reference_solution(
                params, ProliferationKind.F1, DEFAULT_INITIAL_STATE, t_final
            )
        error = relative_difference(trajectory.final_state, references[t_final])
        errors.append(f"h={h:g}: {error:.3e}")
        if error <= MODEL_TOLERANCE:
            break
    return ValidationCheck(
        "model_alpha1_equivalence",
        error <= MODEL_TOLERANCE,
        error,
        MODEL_TOLERANCE,
        f"t={horizon:g}; " + "; ".join(errors),
    )


def relative_difference(values: np.ndarray, reference: np.ndarray) -> float:
    """Largest componentwise relative difference; tiny components use the state scale."""
    floor = 1e-6 * max(float(np.max(np.abs(reference))), 1.0)
    scale = np.maximum(np.abs(reference), floor)
    return float(np.max(np.abs(values - reference) / scale))


def check_equilibrium_residuals(
    samples: int = RANDOM_SAMPLES, seed: int = RANDOM_SEED
) -> ValidationCheck:
    rng = np.random.default_rng(seed)
    worst = 0.0
    parameter_sets = [ModelParams()] + [random_parameters(rng) for _ in range(samples)]
    for params in parameter_sets:
        report = equilibrium_report(params)
        for name, state in report.equilibria().items():
            scale = max(1.0, float(np.max(state.as_array())))
            worst = max(worst, report.residuals[name] / scale)
    return ValidationCheck(
        "equilibrium_residuals",
        worst <= RESIDUAL_TOLERANCE,
        worst,
        RESIDUAL_TOLERANCE,
        f"{len(parameter_sets)} parameter sets",
    )


def check_sensitivity(
    samples: int = RANDOM_SAMPLES, seed: int = RANDOM_SEED
) -> List[ValidationCheck]:
    rng = np.random.default_rng(seed)
    expected_signs = {"beta": "+", "lambda": "+", "N": "+", "mu": "-", "c": "-"}
    sign_mismatches = 0
    worst = 0.0
    for _ in range(samples):
        params = random_parameters(rng)
        closed = sensitivity_indices(params)
        estimate = finite_difference_indices(params)
        for name, sign in expected_signs.items():
            if closed.sign(name) != sign:
                sign_mismatches += 1
            difference = abs(closed.indices[name] - estimate.indices[name])
            worst = max(worst, difference / abs(closed.indices[name]))
    return [
        ValidationCheck("sensitivity_signs", sign_mismatches == 0, float(sign_mismatches), 0.0),
        ValidationCheck(
            "sensitivity_finite_difference",
            worst <= SENSITIVITY_TOLERANCE,
            worst,
            SENSITIVITY_TOLERANCE,
        ),
    ]


def check_boundary_fluxes(
    samples: int = RANDOM_SAMPLES, seed: int = RANDOM_SEED
) -> ValidationCheck:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        params = random_parameters(rng)
        state = State.from_array(rng.uniform(0.0, 1000.0, size=4))
        for kind in ProliferationKind:
            worst = min(worst, float(np.min(boundary_fluxes(state, params, kind))))
    return ValidationCheck("boundary_fluxes_non_negative", worst >= 0.0, worst, 0.0)


def run_validation_suite(
    step_size: Optional[float] = None,
    model_horizon: float = MODEL_HORIZON,
    hooks: Optional[List[SolverHook]] = None,
) -> ValidationReport:
    """
    Run every check. step_size, when given, replaces both the coarsest step
    of the convergence ladder and the step of the absolute-accuracy check.
    """
    report = ValidationReport()
    report.checks.extend(check_mittag_leffler_identities())
    report.checks.extend(
        check_oracle_convergence(step_size or CONVERGENCE_STEP, hooks=hooks)
    )
    report.checks.append(check_classical_accuracy(step_size or ACCURACY_STEP, hooks))
    report.checks.append(check_model_equivalence(model_horizon, hooks=hooks))
    report.checks.append(check_equilibrium_residuals())
    report.checks.extend(check_sensitivity())
    report.checks.append(check_boundary_fluxes())

    for check in report.failures():
        logger.warning(
            f"Validation check {check.name} failed: measured {check.measured:.3e}, "
            f"allowed {check.allowed:.3e} {check.detail}"
        )
    logger.info(
        f"Validation finished: {len(report.checks) - len(report.failures())}"
        f"/{len(report.checks)} checks passed"
    )
    return report
