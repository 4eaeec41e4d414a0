"""
One robot trial
===============

A random heterogeneous network drives the agent from the bottom-left corner.
The static trial stops at the goal line x + y = 1.6 or after 4000 timesteps.
"""
import numpy as np

from memevo.arena import LOG_COLUMNS, Scenario, run_trial
from memevo.evolution import random_network

rng = np.random.default_rng(11)
for k in range(5):
    net = random_network("het", rng)
    res = run_trial(net, log=True)
    print(f"net {k}: fitness {res.fitness:8.1f}  timesteps {res.timesteps}  "
          f"bumps {res.bumps}  goal {res.goal}")

# the log holds one row per timestep
log = res.log
x, y = log[:, LOG_COLUMNS.index("x")], log[:, LOG_COLUMNS.index("y")]
print(f"last agent ended near ({x[-1]:.2f}, {y[-1]:.2f}); furthest x+y = {(x + y).max():.3f}")
pos = log[:, LOG_COLUMNS.index("pos_stdp_hp")].sum()
neg = log[:, LOG_COLUMNS.index("neg_stdp_hp")].sum()
print(f"HP synapses saw {pos:.0f} potentiating and {neg:.0f} depressing events")

# the dynamic scenario adds sensor noise and wheel slip and scores rewards 0, 1 or 2
dyn = run_trial(net, scenario=Scenario.DYNAMIC, seed=3)
print("dynamic rewards:", dyn.rewards)
