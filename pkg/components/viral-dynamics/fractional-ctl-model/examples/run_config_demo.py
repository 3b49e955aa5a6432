"""
Layered run configuration: defaults, a YAML file, environment variables and
explicit overrides.
"""

import tempfile
from pathlib import Path

from run_config import ConfigError, RunConfigLoader

with tempfile.TemporaryDirectory() as directory:
    path = Path(directory) / "run.yaml"
    path.write_text("model:\n  parameters:\n    N: 4\n  kinds: [f1, f4]\n")

    loader = RunConfigLoader(
        config_files=[str(path)],
        overrides={"solver.step_size": 0.05, "model.alphas": [1.0, 0.92]},
        environ={"CTL_MODEL_WORKERS": "2"},
    )
    run = loader.build()
    print(loader)
    print("Params:", run.params.to_dict())
    print("Kinds:", [kind.value for kind in run.kinds], "alphas:", run.alphas)
    print("Solver:", run.solver.to_dict(), "workers:", run.workers)

try:
    RunConfigLoader(overrides={"model.parameters.beta": -1.0}).build()
except ConfigError as e:
    print(f"Rejected: {e}")
