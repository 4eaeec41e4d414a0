"""
Where the memristors end up, and what they do during a trial
============================================================

After evolution the census counts enabled synapses of each kind by layer
pair, by the polarity of the neurons they join, and by sensor modality.
The STDP trace smooths the best network's per-timestep event counts and mean
weights with a trailing 10-timestep window.
"""
import tempfile
from pathlib import Path

import numpy as np

from memevo import records
from memevo.arena import LOG_COLUMNS
from memevo.harness import make_config, merge_census, run_experiment, stdp_trace, topology_census

out = Path(tempfile.mkdtemp()) / "het_census"
run_experiment(make_config("desk", system="het", seed=4, population=12, generations=20,
                           repeats=1), out, jobs=1)

pop = records.load_population(out / "population_r00.json")
census = merge_census(topology_census(m) for m in pop.members)
cols = ("input_hidden", "hidden_hidden", "hidden_output", "ir", "light")
print("kind  " + "  ".join(cols))
for kind in ("HP", "PEO", "LIN"):
    print(f"{kind:5s} " + "  ".join(f"{census[kind][c]:>{len(c)}d}" for c in cols))

_, rows = records.read_csv(out / "best_r00_trajectory.csv")
log = np.array([[float(r[c]) for c in LOG_COLUMNS] for r in rows])
trace = stdp_trace(log, window=10)
print(f"trace rows: {len(trace)}; peak smoothed HP potentiation per timestep: "
      f"{np.nanmax(trace[:, 1]):.2f}")
