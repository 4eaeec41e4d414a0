"""Leaky integrate-and-fire network with hidden-layer transmission delays.

Neurons are indexed globally: inputs ``0..5``, hidden ``6..6+H-1`` and the two
outputs last.  Hidden-to-hidden connections always run from a higher index
to a lower one, so the delay ``i_s - i_r`` is at least one step and the hidden
layer is acyclic.

This module is the readable reference engine.  It keeps an explicit list of
in-flight spikes and mutates :class:`Network` objects step by step.  The
compiled engine in :mod:`memevo.kernel` must reproduce it bit for bit.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numba

from .synapse import (Connection, Kind, MemristorParams, _stdp_delta,
                      reset_connection, stdp_update)

N_INPUTS = 6
N_OUTPUTS = 2


class Layer(enum.IntEnum):
    INPUT = 0
    HIDDEN = 1
    OUTPUT = 2


class Polarity(enum.IntEnum):
    EXCITATORY = 1
    INHIBITORY = -1


class Activation(enum.IntEnum):
    LOW = 0
    HIGH = 1


class Action(enum.IntEnum):
    FORWARD = 0
    LEFT = 1
    RIGHT = 2


@dataclass(frozen=True)
class NetworkParams:
    a: float = 0.3
    b: float = 0.05
    c: float = 0.0
    c_ini: float = 0.5
    y_thresh: float = 1.0
    steps_per_timestep: int = 21
    window_size: int = 21
    last_spike_init: int = 3
    theta_s: int = 4
    initial_hidden: int = 9

    def __post_init__(self):
        for name in ("a", "b", "c_ini", "y_thresh", "steps_per_timestep",
                     "last_spike_init", "theta_s", "initial_hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.c < 0:
            raise ValueError("reset potential must be >= 0")
        if self.window_size != self.steps_per_timestep:
            raise ValueError("window_size must equal steps_per_timestep")


@dataclass
class NeuronState:
    index: int
    layer: Layer
    polarity: Polarity = Polarity.EXCITATORY
    y: float = 0.5
    ls: int = 0


@dataclass
class Network:
    """Genome plus runtime state of one spiking controller."""

    hidden_polarity: list[Polarity]
    connections: list[Connection]
    kind: str = "hp"
    mu: float = 0.1
    psi: float = 0.1
    omega: float = 0.5
    tau: float = 0.1
    fitness: float = 0.0
    params: NetworkParams = field(default_factory=NetworkParams)
    memristor: MemristorParams = field(default_factory=MemristorParams)
    # bookkeeping used by the GA and the harness
    birth: int = 0
    trial_seed: int = 0
    goal: bool = False
    rewards: int = 0
    # runtime state, rebuilt by reset_state()
    neurons: list[NeuronState] = field(default_factory=list, repr=False)
    spike_queue: list[tuple[int, float, int]] = field(default_factory=list, repr=False)
    window: list[int] = field(default_factory=lambda: [0] * N_OUTPUTS, repr=False)
    clock: int = field(default=0, repr=False)

    def __post_init__(self):
        if not self.neurons:
            self.reset_state()

    # -- topology helpers --------------------------------------------------
    @property
    def n_hidden(self) -> int:
        return len(self.hidden_polarity)

    @property
    def n_neurons(self) -> int:
        return N_INPUTS + self.n_hidden + N_OUTPUTS

    def hidden_index(self, j: int) -> int:
        return N_INPUTS + j

    def output_index(self, o: int) -> int:
        return N_INPUTS + self.n_hidden + o

    def layer_of(self, index: int) -> Layer:
        if index < N_INPUTS:
            return Layer.INPUT
        if index < N_INPUTS + self.n_hidden:
            return Layer.HIDDEN
        if index < self.n_neurons:
            return Layer.OUTPUT
        raise IndexError(index)

    def polarity_of(self, index: int) -> Polarity:
        if self.layer_of(index) == Layer.HIDDEN:
            return self.hidden_polarity[index - N_INPUTS]
        return Polarity.EXCITATORY

    def enabled_connections(self) -> list[Connection]:
        return [c for c in self.connections if c.enabled]

    def connected_neurons(self) -> int:
        touched = set()
        for c in self.connections:
            if c.enabled:
                touched.add(c.pre)
                touched.add(c.post)
        return len(touched)

    def connectivity(self) -> float:
        if not self.connections:
            return 0.0
        return 100.0 * sum(c.enabled for c in self.connections) / len(self.connections)

    def copy(self) -> "Network":
        return Network(
            hidden_polarity=list(self.hidden_polarity),
            connections=[c.copy() for c in self.connections],
            kind=self.kind, mu=self.mu, psi=self.psi, omega=self.omega,
            tau=self.tau, fitness=self.fitness, params=self.params,
            memristor=self.memristor, birth=self.birth,
            trial_seed=self.trial_seed, goal=self.goal, rewards=self.rewards,
        )

    def validate(self) -> None:
        if self.n_hidden < 1:
            raise ValueError("network needs at least one hidden neuron")
        seen = set()
        for c in self.connections:
            lp, lq = self.layer_of(c.pre), self.layer_of(c.post)
            if c.pre == c.post:
                raise ValueError(f"self connection on {c.pre}")
            if (lp, lq) not in LEGAL_PAIRS:
                raise ValueError(f"illegal connection {lp.name}->{lq.name}")
            if lp == lq == Layer.HIDDEN and not c.pre > c.post:
                raise ValueError(f"hidden connection {c.pre}->{c.post} runs upward")
            if c.delay != connection_delay(c.pre, c.post, lp, lq):
                raise ValueError(f"stale delay on {c.pre}->{c.post}")
            if not 0.0 <= c.weight <= 1.0:
                raise ValueError(f"weight {c.weight} out of range")
            if (c.pre, c.post) in seen:
                raise ValueError(f"duplicate connection {c.pre}->{c.post}")
            seen.add((c.pre, c.post))

    # -- runtime -----------------------------------------------------------
    def reset_state(self, reset_weights: bool = False) -> None:
        """Membranes to ``c_ini``, spike counters to zero, queue emptied."""
        p = self.params
        self.neurons = [NeuronState(i, self.layer_of(i), self.polarity_of(i), p.c_ini, 0)
                        for i in range(self.n_neurons)]
        self.spike_queue = []
        self.window = [0] * N_OUTPUTS
        self.clock = 0
        if reset_weights:
            for c in self.connections:
                reset_connection(c, self.memristor)


LEGAL_PAIRS = {
    (Layer.INPUT, Layer.HIDDEN),
    (Layer.HIDDEN, Layer.HIDDEN),
    (Layer.HIDDEN, Layer.OUTPUT),
}


@numba.njit(cache=True)
def _step_neuron(y, current, a, b, c, y_thresh):
    y = y + current + a - b * y
    if y < 0.0:
        y = 0.0
    if y > y_thresh:
        return c, True
    return y, False


def step_neuron(y: float, current: float, params: NetworkParams = NetworkParams()):
    """One membrane update; returns ``(y', spiked)``."""
    return _step_neuron(y, current, params.a, params.b, params.c, params.y_thresh)


def connection_delay(i_s: int, i_r: int, pre_layer: Layer = Layer.HIDDEN,
                     post_layer: Layer = Layer.HIDDEN) -> int:
    if pre_layer == Layer.HIDDEN and post_layer == Layer.HIDDEN:
        if i_s <= i_r:
            raise ValueError(f"hidden connection {i_s}->{i_r} must run to a lower index")
        return i_s - i_r
    return 0


def classify_window(n_s: int, t_s: int = 21) -> Activation:
    return Activation.LOW if n_s < t_s / 2 else Activation.HIGH


def decode_action(c0: Activation, c1: Activation) -> Action:
    if c0 == c1:
        return Action.FORWARD
    return Action.LEFT if c0 == Activation.HIGH else Action.RIGHT


def run_step(net: Network, sensors, step_index: int = 0,
             events: Optional[list] = None) -> list[int]:
    """Advance the network by one step; returns indices of neurons that spiked.

    ``events``, if given, receives ``(connection position, +1/-1)`` for every
    STDP event of this step.
    """
    p = net.params
    neurons = net.neurons
    now = net.clock
    current = [0.0] * net.n_neurons
    spiked: list[int] = []

    outgoing: dict[int, list[tuple[int, Connection]]] = {}
    for pos, c in enumerate(net.connections):
        if c.enabled:
            outgoing.setdefault(c.pre, []).append((pos, c))

    def fire(i: int) -> None:
        sign = float(neurons[i].polarity)
        for _, c in outgoing.get(i, ()):
            if c.delay:
                net.spike_queue.append((c.post, sign * c.weight, now + c.delay))
            else:
                current[c.post] += sign * c.weight

    def update(i: int, drive: float) -> None:
        n = neurons[i]
        n.y, hit = step_neuron(n.y, drive, p)
        if hit:
            spiked.append(i)
            fire(i)

    for i in range(N_INPUTS):
        update(i, float(sensors[i]))

    # queued hidden->hidden spikes due now, in emission order
    due = [e for e in net.spike_queue if e[2] == now]
    net.spike_queue = [e for e in net.spike_queue if e[2] != now]
    hidden_current = [0.0] * net.n_neurons
    for target, w, _ in due:
        hidden_current[target] += w
    first_h, first_o = N_INPUTS, N_INPUTS + net.n_hidden
    for i in range(first_h, first_o):
        hidden_current[i] += current[i]
        current[i] = 0.0
    for i in range(first_h, first_o):
        update(i, hidden_current[i])

    for o in range(N_OUTPUTS):
        i = first_o + o
        before = len(spiked)
        update(i, current[i])
        if len(spiked) > before:
            net.window[o] += 1

    for i in spiked:
        neurons[i].ls = p.last_spike_init
    for pos, c in enumerate(net.connections):
        if not c.enabled or c.kind == Kind.CONST:
            continue
        ev = stdp_update(c, neurons[c.pre].ls, neurons[c.post].ls, p.theta_s, net.memristor)
        if ev is not None and events is not None:
            events.append((pos, 1 if ev.positive else -1))
    for n in neurons:
        if n.ls > 0:
            n.ls -= 1
    net.clock += 1
    return spiked


def run_timestep(net: Network, sensors, events: Optional[list] = None) -> Action:
    """Process one sensor frame for ``steps_per_timestep`` steps and decode."""
    net.window = [0] * N_OUTPUTS
    for s in range(net.params.steps_per_timestep):
        run_step(net, sensors, s, events)
    t_s = net.params.window_size
    return decode_action(classify_window(net.window[0], t_s),
                         classify_window(net.window[1], t_s))


def stdp_sign(ls_pre: int, ls_post: int, theta: int) -> int:
    return int(_stdp_delta(ls_pre, ls_post, theta))
