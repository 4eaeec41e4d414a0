"""
A short evolutionary run
========================

Steady-state GA: two roulette-selected parents are cloned and mutated each
generation, then the two worst members are dropped.  This is a cut-down run
(population 20, 60 generations, one repeat) that finishes in well under a
minute; the desk profile is ``population=40, generations=300, repeats=10``.
"""
import tempfile
from pathlib import Path

from memevo import records
from memevo.harness import make_config, run_experiment

out = Path(tempfile.mkdtemp()) / "het_small"
cfg = make_config("desk", system="het", seed=1, population=20, generations=60,
                  interval=10, repeats=1)
run_experiment(cfg, out, jobs=1)

_, snaps = records.read_csv(out / "snapshots.csv")
print("gen   best_f    mean_f  neurons  conn%   mu     solved")
for s in snaps:
    print(f"{int(s['generation']):3d} {float(s['best_f']):9.1f} {float(s['mean_f']):9.1f} "
          f"{float(s['neurons']):7.2f} {float(s['connectivity_pct']):6.1f} "
          f"{float(s['mu']):.3f}  {s['solved']}")

_, perf = records.read_csv(out / "performance.csv")
print("performance (first generation reaching the goal):", perf[0]["performance"])
print("run directory:", out)
