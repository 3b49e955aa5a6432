"""
Basic usage example for the fractional CTL model.
Integrates the baseline infection for each proliferation law and prints the
headline quantities of every run.
"""

from ctl_model import ModelParams, ProliferationKind, simulate, summarize
from fractional_solver import SolverConfig

params = ModelParams()  # baseline parameters, N = 100
config = SolverConfig(step_size=0.005, t_end=100.0)

for alpha in (1.0, 0.96, 0.92):
    for kind in ProliferationKind:
        trajectory = simulate(params.with_overrides(alpha=alpha), kind, config=config)
        summary = summarize(trajectory)
        print(
            f"{kind.value} alpha={alpha}: peak V {summary.peak_viral_load:.1f} "
            f"at day {summary.peak_viral_load_time:.2f}"
        )
        print("  terminal:", summary.terminal_state.to_dict())
        print("  stats:", trajectory.stats.to_dict())
