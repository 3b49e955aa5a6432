import math
import os
import tempfile
import time
import unittest

import numpy as np
from scipy.special import erfc

from ctl_model import (
    DEFAULT_INITIAL_STATE,
    ModelParams,
    ParameterError,
    ProliferationKind,
    State,
    boundary_fluxes,
    proliferation,
    rhs,
    settle_ratios,
    simulate,
    summarize,
)
from equilibrium_analysis import (
    EquilibriumNotDerivedError,
    Regime,
    classify_regime,
    ctl_free_equilibrium,
    disease_free_equilibrium,
    endemic_equilibrium,
    equilibrium_report,
    finite_difference_indices,
    next_generation_r0,
    phi0,
    r0,
    residual_norm,
    sensitivity_indices,
)
from fractional_solver import (
    IntegrationError,
    MittagLefflerError,
    PositivityViolationError,
    SolverConfig,
    SolverError,
    SolverHook,
    Trajectory,
    _WeightTables,
    abm_weights,
    integrate,
    mittag_leffler,
    mittag_leffler_relaxation,
)
from run_config import ConfigError, RunConfigLoader
from validation_suite import (
    check_boundary_fluxes,
    check_equilibrium_residuals,
    check_oracle_convergence,
    check_sensitivity,
    random_parameters,
)


class TestFractionalSolverUnit(unittest.TestCase):
    def test_predictor_weights_at_order_one(self):
        b, _ = abm_weights(5, 1.0, h=0.1)
        np.testing.assert_allclose(b, np.full(6, 0.1), rtol=1e-14)

    def test_last_predictor_weight(self):
        for alpha in (0.5, 0.92, 1.0):
            b, _ = abm_weights(7, alpha, h=0.2)
            self.assertAlmostEqual(b[-1], 0.2**alpha / alpha, places=14)

    def test_corrector_weights_at_order_one_are_trapezoid(self):
        _, a = abm_weights(2, 1.0)
        np.testing.assert_allclose(a, [0.5, 1.0, 1.0, 0.5], rtol=1e-14)

    def test_weight_sums_integrate_constants(self):
        # Both rules are exact for constant integrands
        for alpha in (0.5, 0.8, 1.0):
            b, a = abm_weights(9, alpha, h=0.05)
            exact = (10 * 0.05) ** alpha / alpha
            self.assertAlmostEqual(b.sum(), exact, places=12)
            self.assertAlmostEqual(a.sum(), exact, places=12)

    def test_weight_tables_match_direct_weights(self):
        tables = _WeightTables(12, 0.7, 0.1)
        for n in (0, 1, 5, 12):
            b, a = abm_weights(n, 0.7, h=0.1)
            np.testing.assert_allclose(tables.predictor(n), b, rtol=1e-12)
            np.testing.assert_allclose(tables.corrector(n), a[:-1], rtol=1e-12)
            self.assertAlmostEqual(tables.a_scale, a[-1], places=14)

    def test_invalid_weights_request(self):
        with self.assertRaises(ValueError):
            abm_weights(-1, 0.5)
        with self.assertRaises(ValueError):
            abm_weights(3, 1.5)

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            SolverConfig(alpha=0.0)
        with self.assertRaises(ValueError):
            SolverConfig(step_size=0.5, t_end=0.1)
        with self.assertRaises(ValueError):
            SolverConfig(step_size=-0.1)
        with self.assertRaises(ValueError):
            SolverConfig(corrector_iterations=0)

    def test_grid_contract(self):
        trajectory = integrate(lambda t, y: -y, [1.0], SolverConfig(step_size=0.5, t_end=1.0))
        np.testing.assert_array_equal(trajectory.times, [0.0, 0.5, 1.0])

        trajectory = integrate(lambda t, y: -y, [1.0], SolverConfig(step_size=0.3, t_end=1.0))
        self.assertEqual(len(trajectory), 4)
        self.assertAlmostEqual(trajectory.times[-1], 0.9, places=12)
        self.assertEqual(trajectory.states[0, 0], 1.0)

    def test_zero_field_keeps_initial_state(self):
        y0 = [1.0, 2.5, 0.0]
        config = SolverConfig(alpha=0.6, step_size=0.1, t_end=2.0)
        trajectory = integrate(lambda t, y: np.zeros_like(y), y0, config)
        for state in trajectory.states:
            np.testing.assert_array_equal(state, y0)

    def test_exponential_decay_at_order_one(self):
        config = SolverConfig(alpha=1.0, step_size=1e-3, t_end=1.0)
        trajectory = integrate(lambda t, y: -y, [1.0], config)
        self.assertLessEqual(abs(trajectory.final_state[0] - math.exp(-1.0)), 1e-6)

    def test_half_order_converges_to_oracle(self):
        errors = []
        for h in (0.02, 0.01, 0.005, 0.0025):
            trajectory = integrate(
                lambda t, y: -y, [1.0], SolverConfig(alpha=0.5, step_size=h, t_end=1.0)
            )
            exact = mittag_leffler_relaxation(0.5, trajectory.times)
            errors.append(np.max(np.abs(trajectory.states[:, 0] - exact)))
        for earlier, later in zip(errors, errors[1:]):
            self.assertLess(later, earlier)

    def test_order_one_takes_one_step_pairs(self):
        def field(t, y):
            return np.array([-y[0] ** 2 + math.sin(t), -3.0 * y[1]])

        h = 0.05
        trajectory = integrate(field, [1.0, 2.0], SolverConfig(step_size=h, t_end=1.0))
        expected = np.array([1.0, 2.0])
        for n in range(20):
            slope = field(n * h, expected)
            predicted = expected + h * slope
            expected = expected + 0.5 * h * (slope + field((n + 1) * h, predicted))
            np.testing.assert_allclose(trajectory.states[n + 1], expected, rtol=1e-13)

    def test_order_one_hooks_see_one_step_weights(self):
        class WeightRecorder(SolverHook):
            def __init__(self):
                self.seen = []

            def on_weights(self, step_index, predictor, corrector):
                self.seen.append((predictor.copy(), corrector.copy()))
                return predictor, corrector

        hook = WeightRecorder()
        integrate(lambda t, y: -y, [1.0], SolverConfig(step_size=0.25, t_end=1.0), hooks=[hook])
        self.assertEqual(len(hook.seen), 4)
        for predictor, corrector in hook.seen:
            np.testing.assert_array_equal(predictor, [0.25])
            np.testing.assert_array_equal(corrector, [0.125])

    def test_order_one_keeps_relative_precision_of_tiny_values(self):
        # exp(-100) is far below the rounding error of a sum started at y0 = 1
        config = SolverConfig(step_size=1e-3, t_end=5.0)
        trajectory = integrate(lambda t, y: -20.0 * y, [1.0], config)
        np.testing.assert_allclose(trajectory.final_state[0], math.exp(-100.0), rtol=1e-2)

    def test_oracle_convergence_check_passes(self):
        checks = check_oracle_convergence()
        self.assertEqual(len(checks), 4)
        for check in checks:
            self.assertTrue(check.passed, check.detail)

    def test_positivity_violation_reports_step(self):
        config = SolverConfig(step_size=0.5, t_end=2.0)
        with self.assertRaises(PositivityViolationError) as context:
            integrate(lambda t, y: -np.ones_like(y), [1.0], config)
        self.assertEqual(context.exception.step_index, 3)
        self.assertEqual(context.exception.component, 0)
        self.assertAlmostEqual(context.exception.value, -0.5)

    def test_non_finite_field_raises(self):
        with self.assertRaises(IntegrationError):
            integrate(
                lambda t, y: np.full_like(y, np.inf), [1.0], SolverConfig(step_size=0.5, t_end=1.0)
            )

    def test_invalid_initial_condition(self):
        config = SolverConfig(step_size=0.5, t_end=1.0)
        with self.assertRaises(ValueError):
            integrate(lambda t, y: -y, [-1.0], config)
        with self.assertRaises(ValueError):
            integrate(lambda t, y: -y, [np.nan], config)

    def test_hooks_and_stats(self):
        class RecordingHook(SolverHook):
            def __init__(self):
                self.steps = []
                self.weight_calls = 0

            def on_weights(self, step_index, predictor, corrector):
                self.weight_calls += 1
                return predictor, corrector

            def on_step(self, step_index, t, state):
                self.steps.append(step_index)

        hook = RecordingHook()
        config = SolverConfig(alpha=0.9, step_size=0.1, t_end=1.0, corrector_iterations=2)
        trajectory = integrate(lambda t, y: -y, [1.0], config, hooks=[hook])
        self.assertEqual(hook.steps, list(range(11)))
        self.assertEqual(hook.weight_calls, 10)
        self.assertEqual(trajectory.stats.steps, 10)
        # initial + (2 corrector passes + 1 history evaluation) per step
        self.assertEqual(trajectory.stats.rhs_evaluations, 1 + 10 * 3)
        self.assertIn("steps_per_second", trajectory.stats.to_dict())

    def test_state_at(self):
        trajectory = integrate(lambda t, y: -y, [1.0], SolverConfig(step_size=0.5, t_end=1.0))
        np.testing.assert_array_equal(trajectory.state_at(0.5), trajectory.states[1])
        with self.assertRaises(IndexError):
            trajectory.state_at(5.0)


class TestMittagLefflerUnit(unittest.TestCase):
    def test_exponential_identity(self):
        self.assertAlmostEqual(mittag_leffler(1.0, 1.0), math.e, places=12)
        self.assertAlmostEqual(mittag_leffler(1.0, -5.0), math.exp(-5.0), places=12)

    def test_zero_argument(self):
        for alpha in (0.3, 0.5, 1.0, 1.7):
            self.assertEqual(mittag_leffler(alpha, 0.0), 1.0)

    def test_half_order_erfc_identity(self):
        self.assertAlmostEqual(mittag_leffler(0.5, -1.0), math.e * erfc(1.0), places=12)

    def test_order_two_is_cosine(self):
        self.assertAlmostEqual(mittag_leffler(2.0, -4.0), math.cos(2.0), places=12)

    def test_large_negative_argument(self):
        self.assertAlmostEqual(mittag_leffler(1.0, -30.0), math.exp(-30.0), delta=1e-20)

    def test_invalid_order(self):
        with self.assertRaises(ValueError):
            mittag_leffler(0.0, 1.0)

    def test_out_of_reach_argument_raises_promptly(self):
        start_time = time.time()
        with self.assertRaises(MittagLefflerError) as context:
            mittag_leffler(0.3, -50.0)
        self.assertLess(time.time() - start_time, 1.0)
        self.assertEqual(context.exception.alpha, 0.3)
        self.assertIn("digits", str(context.exception))

    def test_overflowing_value_raises(self):
        with self.assertRaises(MittagLefflerError):
            mittag_leffler(0.5, 50.0)
        with self.assertRaises(SolverError):
            mittag_leffler(1.0, 800.0)

    def test_caps_are_configurable(self):
        with self.assertRaises(MittagLefflerError):
            mittag_leffler(1.0, -30.0, max_terms=20)
        with self.assertRaises(MittagLefflerError):
            mittag_leffler(0.5, -10.0, max_digits=40)

    def test_relaxation_starts_at_one(self):
        values = mittag_leffler_relaxation(0.8, [0.0, 0.5, 1.0])
        self.assertEqual(values[0], 1.0)
        self.assertTrue(np.all(np.diff(values) < 0))


class TestCtlModelUnit(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams()

    def test_baseline_vector_field(self):
        values = rhs(DEFAULT_INITIAL_STATE, self.params, ProliferationKind.F1)
        np.testing.assert_allclose(values, [-10.0, 10.0, -30.0, -26.64], rtol=1e-12)

    def test_vector_field_vanishes_at_disease_free_state(self):
        state = State(T=1000.0, I=0.0, V=0.0, C=0.0)
        for kind in ProliferationKind:
            np.testing.assert_allclose(rhs(state, self.params, kind), 0.0, atol=1e-12)

    def test_fractional_order_exponentiates_rates(self):
        params = self.params.with_overrides(alpha=0.5)
        state = State(T=1000.0, I=0.0, V=0.0, C=0.0)
        values = rhs(state, params, ProliferationKind.F1)
        self.assertAlmostEqual(values[0], math.sqrt(10.0) - math.sqrt(0.01) * 1000.0, places=10)

    def test_proliferation_laws(self):
        self.assertAlmostEqual(
            proliferation(ProliferationKind.F1, 0.4, 18.98, self.params), 1.5184, places=12
        )
        self.assertAlmostEqual(proliferation(ProliferationKind.F2, 2.0, 5.0, self.params), 0.4)
        self.assertAlmostEqual(
            proliferation(ProliferationKind.F3, 2.0, 5.0, self.params), 2.0 / 1.05, places=12
        )
        self.assertAlmostEqual(
            proliferation(ProliferationKind.F4, 2.0, 5.0, self.params), 0.4 / 120.02, places=14
        )
        for kind in ProliferationKind:
            self.assertEqual(proliferation(kind, 0.0, 50.0, self.params), 0.0)

    def test_proliferation_rejects_negative_input(self):
        with self.assertRaises(ParameterError):
            proliferation(ProliferationKind.F1, -1.0, 1.0, self.params)

    def test_boundary_fluxes(self):
        state = State(T=2.0, I=0.0, V=5.0, C=1.0)
        fluxes = boundary_fluxes(state, self.params, ProliferationKind.F1)
        self.assertEqual(fluxes[0], 10.0)
        self.assertAlmostEqual(fluxes[1], 0.01, places=15)

    def test_boundary_fluxes_non_negative_for_random_inputs(self):
        self.assertTrue(check_boundary_fluxes(samples=200).passed)

    def test_parameter_validation(self):
        with self.assertRaises(ParameterError):
            ModelParams(beta=0.0)
        with self.assertRaises(ParameterError):
            ModelParams(alpha=1.5)
        with self.assertRaises(ParameterError):
            ModelParams(mu=float("nan"))
        with self.assertRaises(ParameterError):
            self.params.with_overrides(gamma=1.0)

    def test_parameter_aliases(self):
        params = ModelParams.from_dict({"lambda": 20, "N": 4})
        self.assertEqual(params.lam, 20.0)
        self.assertEqual(params.get("lambda"), 20.0)
        self.assertEqual(params.to_dict()["lambda"], 20.0)
        self.assertNotIn("lam", params.to_dict())

    def test_state_validation(self):
        with self.assertRaises(ParameterError):
            State(T=1.0, I=-0.1, V=0.0, C=0.0)
        state = State.from_array([1, 2, 3, 4])
        np.testing.assert_array_equal(state.as_array(), [1.0, 2.0, 3.0, 4.0])

    def test_kind_parsing(self):
        self.assertIs(ProliferationKind.parse("F3"), ProliferationKind.F3)
        self.assertIs(ProliferationKind.parse(ProliferationKind.F2), ProliferationKind.F2)
        with self.assertRaises(ParameterError):
            ProliferationKind.parse("f5")

    def test_simulate_uses_parameter_order(self):
        params = self.params.with_overrides(alpha=0.9)
        trajectory = simulate(
            params, ProliferationKind.F2, config=SolverConfig(step_size=0.005, t_end=1.0)
        )
        self.assertEqual(trajectory.config.alpha, 0.9)
        self.assertEqual(len(trajectory), 201)
        np.testing.assert_array_equal(trajectory.states[0], [1000.0, 0.0, 10.0, 333.0])

    def test_summarize(self):
        trajectory = simulate(
            self.params, ProliferationKind.F1, config=SolverConfig(step_size=0.005, t_end=5.0)
        )
        summary = summarize(trajectory)
        self.assertGreaterEqual(summary.peak_viral_load, 10.0)
        self.assertEqual(summary.peak_infected, float(np.max(trajectory.states[:, 1])))
        self.assertIn("terminal_state", summary.to_dict())
        self.assertEqual(list(summary.settle_ratios), ["T", "I", "V", "C"])

    def test_settle_ratios(self):
        times = np.arange(21, dtype=float)
        states = np.column_stack(
            [np.full(21, 5.0), 20.0 - times, np.zeros(21), times]
        )
        trajectory = Trajectory(times, states, SolverConfig(step_size=1.0, t_end=20.0))
        self.assertEqual(
            settle_ratios(trajectory), {"T": 0.0, "I": 0.5, "V": 0.0, "C": 0.5}
        )
        self.assertEqual(settle_ratios(trajectory, window=40.0)["C"], 1.0)


class TestEquilibriumAnalysisUnit(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams()

    def test_reproduction_number(self):
        self.assertAlmostEqual(r0(self.params), 100.0 / 3.0, delta=1e-12)
        self.assertAlmostEqual(r0(self.params.with_overrides(N=3)), 1.0, delta=1e-12)

    def test_reproduction_number_fractional(self):
        params = self.params.with_overrides(alpha=0.9)
        expected = (0.001 * 10.0 / (0.01 * 3.0)) ** 0.9 * 100.0
        self.assertAlmostEqual(r0(params), expected, places=10)

    def test_next_generation_matrix_agrees(self):
        for alpha in (1.0, 0.92):
            params = self.params.with_overrides(alpha=alpha)
            self.assertAlmostEqual(next_generation_r0(params) / r0(params), 1.0, places=12)

    def test_coexistence_threshold(self):
        self.assertAlmostEqual(phi0(self.params), 7.0 / 3.0, delta=1e-12)
        self.assertAlmostEqual(phi0(self.params.with_overrides(N=10)), 1.0 + 0.0008 / 0.006, places=12)

    def test_disease_free_equilibrium(self):
        np.testing.assert_allclose(
            disease_free_equilibrium(self.params).as_array(), [1000.0, 0.0, 0.0, 0.0], rtol=1e-14
        )
        params = self.params.with_overrides(mu=10.0)
        self.assertAlmostEqual(disease_free_equilibrium(params).T, 1.0)

    def test_ctl_free_equilibrium(self):
        x1 = ctl_free_equilibrium(self.params)
        np.testing.assert_allclose(x1.as_array(), [30.0, 9.7, 970.0 / 3.0, 0.0], rtol=1e-12)
        self.assertIsNone(ctl_free_equilibrium(self.params.with_overrides(N=3)))

    def test_endemic_equilibrium(self):
        x2 = endemic_equilibrium(self.params)
        np.testing.assert_allclose(
            x2.as_array(), [6.0 / 0.014, 0.4, 40.0 / 3.0, 0.186 / 0.0098], rtol=1e-12
        )
        self.assertLessEqual(residual_norm(x2, self.params), 1e-10 * 428.6)

    def test_infected_level_independent_of_burst_size(self):
        for N in (10.0, 100.0, 2500.0):
            x2 = endemic_equilibrium(self.params.with_overrides(N=N))
            self.assertAlmostEqual(x2.I, 0.4, places=12)

    def test_regimes(self):
        self.assertIs(classify_regime(self.params), Regime.COEXISTENCE)
        self.assertIs(classify_regime(self.params.with_overrides(N=3)), Regime.DISEASE_FREE_ONLY)
        self.assertIs(classify_regime(self.params.with_overrides(N=2)), Regime.DISEASE_FREE_ONLY)
        self.assertIs(classify_regime(self.params.with_overrides(N=3.1)), Regime.CTL_FREE_EXISTS)
        self.assertIs(classify_regime(self.params.with_overrides(N=4)), Regime.COEXISTENCE)

    def test_presence_matches_thresholds(self):
        for N in (2.0, 3.1, 4.0, 100.0):
            params = self.params.with_overrides(N=N)
            report = equilibrium_report(params)
            self.assertEqual(report.x1 is not None, report.r0 > 1.0)
            self.assertEqual(report.x2 is not None, report.r0 > report.phi0)
            if report.x2 is not None:
                self.assertIsNotNone(report.x1)

    def test_report_at_threshold_lists_only_disease_free(self):
        report = equilibrium_report(self.params.with_overrides(N=3))
        self.assertEqual(list(report.equilibria()), ["x0"])
        self.assertEqual(report.to_dict()["regime"], "DiseaseFreeOnly")

    def test_equilibria_not_derived_for_other_laws(self):
        for kind in (ProliferationKind.F2, ProliferationKind.F3, ProliferationKind.F4):
            with self.assertRaises(EquilibriumNotDerivedError):
                equilibrium_report(self.params, kind)
            with self.assertRaises(EquilibriumNotDerivedError):
                endemic_equilibrium(self.params, kind)

    def test_sensitivity_indices(self):
        report = sensitivity_indices(self.params)
        self.assertEqual(report.to_dict(), {"beta": 1.0, "lambda": 1.0, "N": 1.0, "mu": -1.0, "c": -1.0})
        report = sensitivity_indices(self.params.with_overrides(alpha=0.92))
        self.assertEqual(report.indices["beta"], 0.92)
        self.assertEqual(report.indices["N"], 1.0)
        self.assertEqual([report.sign(name) for name in ("beta", "lambda", "N", "mu", "c")], ["+", "+", "+", "-", "-"])

    def test_finite_differences_match_closed_form(self):
        params = self.params.with_overrides(alpha=0.96)
        closed = sensitivity_indices(params)
        estimate = finite_difference_indices(params)
        for name, value in closed.indices.items():
            self.assertAlmostEqual(estimate.indices[name], value, delta=1e-6 * abs(value))

    def test_randomized_residuals_and_sensitivities(self):
        self.assertTrue(check_equilibrium_residuals(samples=200).passed)
        for check in check_sensitivity(samples=200):
            self.assertTrue(check.passed, check.name)

    def test_random_parameters_are_valid(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            params = random_parameters(rng)
            self.assertTrue(0.5 <= params.alpha <= 1.0)
            self.assertGreater(phi0(params), 1.0)


class TestRunConfigUnit(unittest.TestCase):
    def test_defaults(self):
        run = RunConfigLoader(environ={}).build()
        self.assertEqual(run.params, ModelParams())
        self.assertEqual(run.kinds, [ProliferationKind.F1])
        self.assertEqual(run.alphas, [1.0])
        self.assertEqual(run.initial_state, DEFAULT_INITIAL_STATE)
        self.assertEqual(run.solver.step_size, 0.005)
        self.assertEqual(run.solver.t_end, 100.0)
        self.assertEqual([axis.name for axis in run.axes], ["beta", "mu"])
        self.assertEqual(run.workers, 4)
        self.assertEqual(run.log_level, "INFO")

    def test_overrides_take_precedence(self):
        loader = RunConfigLoader(
            overrides={
                "solver.step_size": 0.5,
                "solver.t_end": None,
                "model.kinds": ["f2", "F4"],
                "model.parameters.N": "4",
            },
            environ={"CTL_MODEL_STEP_SIZE": "0.25", "CTL_MODEL_WORKERS": "2"},
        )
        run = loader.build()
        self.assertEqual(run.solver.step_size, 0.5)
        self.assertEqual(run.solver.t_end, 100.0)
        self.assertEqual(run.kinds, [ProliferationKind.F2, ProliferationKind.F4])
        self.assertEqual(run.params.N, 4.0)
        self.assertEqual(run.workers, 2)
        self.assertEqual(loader.get("model.parameters.lambda"), 10.0)

    def test_yaml_file_layer(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "run.yaml")
            with open(path, "w") as handle:
                handle.write("model:\n  parameters:\n    N: 3.1\n  alphas: [0.96, 0.92]\n")
            run = RunConfigLoader(config_files=[path], environ={}).build()
        self.assertEqual(run.params.N, 3.1)
        self.assertEqual(run.params.beta, 0.001)
        self.assertEqual(run.alphas, [0.96, 0.92])

    def test_json_file_layer(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "run.json")
            with open(path, "w") as handle:
                handle.write('{"outputs": {"directory": "out", "svg": true}}')
            run = RunConfigLoader(config_files=[path], environ={}).build()
        self.assertTrue(run.outputs.svg)
        self.assertEqual(str(run.outputs.directory), "out")

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            RunConfigLoader(config_files=["/nonexistent/run.yaml"], environ={})

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"model.parameters.beta": -1.0}, environ={}).build()
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"model.alphas": [1.2]}, environ={}).build()
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"sweep.axes": ["beta:1:2"]}, environ={}).build()
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"sweep.workers": 0}, environ={})
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"model.kinds": ["f9"]}, environ={}).build()
        with self.assertRaises(ConfigError):
            RunConfigLoader(overrides={"logging.level": "loud"}, environ={})

    def test_log_level_is_normalized(self):
        run = RunConfigLoader(environ={"CTL_MODEL_LOG_LEVEL": "debug"}).build()
        self.assertEqual(run.log_level, "DEBUG")

    def test_missing_key(self):
        loader = RunConfigLoader(environ={})
        with self.assertRaises(ConfigError):
            loader.get("model.unknown")
        self.assertEqual(loader.get("model.unknown", "fallback"), "fallback")

    def test_resolved_is_a_copy(self):
        loader = RunConfigLoader(environ={})
        resolved = loader.resolved()
        resolved["solver"]["step_size"] = 99.0
        self.assertEqual(loader.get("solver.step_size"), 0.005)


if __name__ == "__main__":
    unittest.main()
