"""
Thresholds, equilibria and sensitivity indices of R0 as the burst size N
moves across the three regimes.
"""

import json

from ctl_model import ModelParams
from equilibrium_analysis import (
    equilibrium_report,
    finite_difference_indices,
    next_generation_r0,
    sensitivity_indices,
)

for N in (2.0, 3.1, 4.0, 100.0):
    params = ModelParams(N=N)
    report = equilibrium_report(params)
    print(f"N={N}: regime {report.regime.value}, next-generation R0 {next_generation_r0(params):.6f}")
    print(json.dumps(report.to_dict(), indent=2))

params = ModelParams(alpha=0.92)
print("Closed form:", sensitivity_indices(params).to_dict())
print("Finite differences:", finite_difference_indices(params).to_dict())
