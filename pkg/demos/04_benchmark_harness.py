# Driving the experiment harness from Python.
#
# Same machinery as the leadsel-bench command: build a config, run it, write
# CSV tables and fit log-log scaling exponents.

import tempfile
from pathlib import Path

from leadsel.bench import ExperimentConfig, emit_report, run_experiment

cfg = ExperimentConfig.from_dict({
    "kind": "scaling",
    "n": [50, 100, 200],
    "k": None,
    "k_fraction": 0.05,
    "algorithms": ["ordinary", "lazy", "stochastic"],
    "epsilon": [0.1],
    "seeds": [0],
    "er_p": 0.1,
})
report = run_experiment(cfg)

for row in report.tables["scaling"]:
    print(f"{row['algorithm']:10s} n={row['n']:4d} k={row['k']:3d} "
          f"calls={row['mean_calls']:8.0f} seconds={row['mean_seconds']:.3f}")
for fit in report.fits:
    print(f"{fit['algorithm']:10s} {fit['metric']:8s} exponent {fit['d']:.2f} (r2 {fit['r2']:.3f})")

out = Path(tempfile.mkdtemp())
for path in emit_report(report, "csv", out):
    print("wrote", path)
