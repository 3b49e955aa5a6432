"""
R0 surface over (beta, mu) and a coexistence map over (N, c), written as CSV
with an SVG heatmap next to the surface.
"""

from pathlib import Path

from artifact_writer import render_surface_svg, write_regime_csv, write_sweep_csv
from ctl_model import ModelParams
from parameter_sweep import AxisSpec, default_axis, r0_surface, regime_map

output = Path("results")
base = ModelParams()

grid = r0_surface(base, default_axis("beta"), default_axis("mu"), workers=4)
print("Sweep metrics:", grid.metrics.to_dict())
write_sweep_csv(output / "r0_surface_beta_mu.csv", grid)
render_surface_svg(output / "r0_surface_beta_mu.svg", grid, log_x=True, log_y=True)

regimes = regime_map(base, AxisSpec("N", 1.0, 10.0, 19), AxisSpec.parse("c:0.5:10:20:log"))
write_regime_csv(output / "regimes_N_c.csv", regimes)
print("Regime codes:\n", regimes.codes())
