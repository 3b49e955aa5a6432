"""
Solver hooks: observe integration steps and validate the solver against the
Mittag-Leffler relaxation oracle.
"""

import numpy as np

from fractional_solver import SolverConfig, SolverHook, integrate, mittag_leffler_relaxation


class ProgressHook(SolverHook):
    def __init__(self, every: int):
        self.every = every

    def on_step(self, step_index, t, state):
        if step_index % self.every == 0:
            print(f"step {step_index}: t={t:.2f} y={state[0]:.6f}")


for alpha in (0.5, 0.92, 1.0):
    config = SolverConfig(alpha=alpha, step_size=0.01, t_end=1.0)
    trajectory = integrate(lambda t, y: -y, [1.0], config, hooks=[ProgressHook(50)])
    exact = mittag_leffler_relaxation(alpha, trajectory.times)
    print(f"alpha={alpha}: max error {np.max(np.abs(trajectory.states[:, 0] - exact)):.3e}")
