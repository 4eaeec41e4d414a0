"""
Comparing two systems
=====================

Each run directory records one value per repeat for performance, final best
fitness, connected neurons and connectivity.  ``compare_runs`` prints the
means and standard deviations with pairwise Welch t-test p-values.  The tiny
runs here only show the mechanics; use the desk or paper profile for real
comparisons (``memevo run --profile desk``).
"""
import tempfile
from pathlib import Path

from memevo.harness import compare_runs, load_run, make_config, run_experiment

root = Path(tempfile.mkdtemp())
runs = []
for system in ("ga", "het"):
    cfg = make_config("desk", system=system, seed=8, population=10, generations=15, repeats=3)
    runs.append(load_run(run_experiment(cfg, root / system, jobs=1)))

print(compare_runs(runs))
