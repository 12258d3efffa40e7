"""
Comparing the five methods on a small benchmark
===============================================

``run_experiment`` is the library form of ``bench run``: it draws random
instances, runs every method from the origin under the same time budget,
and averages the normalized objective decrease ``E(t)`` over trials.
CSV files and an SVG plot land in ``demo_results/``.
"""

from nexpga.bench import ExperimentConfig, run_experiment

config = ExperimentConfig(n=500, trials=3, T_max=0.5, lambdas=[0.1], seed=0,
                          output_dir="demo_results")
result = run_experiment(config)

print("E(t) averaged over", config.trials, "trials")
print(f"{'method':>10s} {'t=0.05s':>10s} {'t=0.1s':>10s} {'t=T_max':>10s}")
grid = result.grid
for (lam, label), curve in result.curves.items():
    at = lambda t: curve.values[grid.searchsorted(t)]  # noqa: E731
    print(f"{label:>10s} {at(0.05):10.2e} {at(0.1):10.2e} {curve.values[-1]:10.2e}")

print("files written:", ", ".join(sorted(p.name for p in result.files if "trace" not in p.name)))
