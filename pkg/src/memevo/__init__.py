"""Spiking networks with memristive STDP synapses, evolved to steer a robot."""
from .arena import ArenaConfig, Scenario, TrialResult, run_trial
from .evolution import SYSTEMS, Population, make_offspring, random_network
from .harness import RunConfig, make_config, run_experiment
from .snn import Action, Network, NetworkParams, run_timestep
from .synapse import Kind, MemristorParams, characterize, weight

__version__ = "0.1.0"

__all__ = [
    "Action", "ArenaConfig", "Kind", "MemristorParams", "Network", "NetworkParams",
    "Population", "RunConfig", "SYSTEMS", "Scenario", "TrialResult", "characterize",
    "make_config", "make_offspring", "random_network", "run_experiment", "run_timestep",
    "run_trial", "weight",
]
