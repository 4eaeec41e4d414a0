"""
A lone LIF neuron and the output window
=======================================

With no input the membrane drifts up by the bias term and leaks a little
each step.  Starting from 0.5 it crosses the threshold on step 2 and then
fires every fourth step.
"""
import numpy as np

from memevo import kernel
from memevo.snn import Network, Polarity, classify_window, run_timestep, step_neuron

y = 0.5
for step in range(1, 22):
    y, spiked = step_neuron(y, 0.0)
    print(f"step {step:2d}  y = {y:.5f}{'  spike' if spiked else ''}")

# the same behaviour inside a network with no enabled connections
net = Network(hidden_polarity=[Polarity.EXCITATORY] * 3, connections=[])
raster, _, _ = kernel.run_steps(net, np.zeros((21, 6)))
n_out = int(raster[:, net.output_index(0)].sum())
print(f"output 0 fired {n_out} times in 21 steps -> {classify_window(n_out).name}")

# two low outputs decode to "forward"
print("action:", run_timestep(Network(hidden_polarity=[Polarity.EXCITATORY], connections=[]),
                              np.zeros(6)).name)
