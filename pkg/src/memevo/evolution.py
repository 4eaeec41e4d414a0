"""Steady-state GA with self-adaptive rates and topology mutation.

Each generation two parents are drawn by roulette wheel, cloned, mutated and
evaluated.  The two offspring join the population and the two lowest-fitness
members (oldest first on ties) are removed, so the population size never
changes and parents compete with their children.  No crossover.

All randomness comes from one ``numpy.random.Generator`` per population.
Draw order per offspring: four normals (mu, psi, omega, tau), the weight or
type mutation draws, the node event, then the connection event.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .snn import (N_INPUTS, N_OUTPUTS, Layer, Network, NetworkParams, Polarity,
                  connection_delay)
from .synapse import (VARIABLE_KINDS, Connection, Kind, MemristorParams,
                      init_q_for_weight, weight)

SYSTEMS = ("hp", "peo", "lin", "ga", "het")
EPS = 1e-6

_SYSTEM_KIND = {"hp": Kind.HP, "peo": Kind.PEO, "lin": Kind.LIN, "ga": Kind.CONST}


def _pick_kind(system: str, rng: np.random.Generator) -> Kind:
    if system == "het":
        return VARIABLE_KINDS[int(rng.integers(3))]
    return _SYSTEM_KIND[system]


def _set_fresh_weight(conn: Connection, rng: np.random.Generator, mp: MemristorParams) -> None:
    if conn.kind == Kind.CONST:
        conn.weight = float(rng.random())
        conn.q = 0.0
    else:
        conn.q = init_q_for_weight(conn.kind, 0.5, mp)
        conn.weight = weight(conn.kind, conn.q, mp)


def _new_connection(net: Network, pre: int, post: int, rng: np.random.Generator,
                    enabled: bool) -> Connection:
    conn = Connection(pre, post, _pick_kind(net.kind, rng), enabled)
    _set_fresh_weight(conn, rng, net.memristor)
    conn.delay = connection_delay(pre, post, net.layer_of(pre), net.layer_of(post))
    return conn


def random_network(system: str, rng: np.random.Generator,
                   params: NetworkParams = NetworkParams(),
                   memristor: MemristorParams = MemristorParams(),
                   n_hidden: Optional[int] = None) -> Network:
    """Fresh fully connected network with random polarities and rates."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    n_hidden = params.initial_hidden if n_hidden is None else n_hidden
    polarity = [Polarity.EXCITATORY if rng.random() < 0.5 else Polarity.INHIBITORY
                for _ in range(n_hidden)]
    net = Network(hidden_polarity=polarity, connections=[], kind=system,
                  params=params, memristor=memristor)
    for pre, post in legal_pairs(n_hidden):
        net.connections.append(_new_connection(net, pre, post, rng, True))
    net.mu = max(float(rng.uniform(0, 0.25)), EPS)
    net.psi = max(float(rng.uniform(0, 0.5)), EPS)
    net.omega = max(float(rng.uniform(0, 1.0)), EPS)
    net.tau = max(float(rng.uniform(0, 0.25)), EPS)
    net.reset_state()
    return net


def legal_pairs(n_hidden: int):
    """Every allowed (pre, post) pair, in genome order."""
    hidden = range(N_INPUTS, N_INPUTS + n_hidden)
    outputs = range(N_INPUTS + n_hidden, N_INPUTS + n_hidden + N_OUTPUTS)
    for i in range(N_INPUTS):
        for h in hidden:
            yield i, h
    for s in hidden:
        for r in hidden:
            if s > r:
                yield s, r
    for h in hidden:
        for o in outputs:
            yield h, o


# -- operators -------------------------------------------------------------

def select_parent(members: list[Network], rng: np.random.Generator) -> Network:
    """Roulette wheel over fitness; uniform when every fitness is zero."""
    if not members:
        raise ValueError("cannot select from an empty population")
    fit = np.array([max(m.fitness, 0.0) for m in members])
    total = fit.sum()
    u = rng.random()
    if total <= 0:
        return members[min(int(u * len(members)), len(members) - 1)]
    idx = int(np.searchsorted(np.cumsum(fit) / total, u, side="right"))
    return members[min(idx, len(members) - 1)]


def self_adapt(v: float, rng: Optional[np.random.Generator] = None,
               draw: Optional[float] = None) -> float:
    """Log-normal perturbation ``v * exp(N(0, 1))`` kept inside ``(0, 1]``."""
    n = rng.standard_normal() if draw is None else draw
    return min(max(v * math.exp(n), EPS), 1.0)


def mutate_weights(net: Network, mu: float, rng: np.random.Generator) -> Network:
    for c in net.connections:
        if c.enabled and c.kind == Kind.CONST and rng.random() < mu:
            c.weight = float(rng.random())
    return net


def mutate_types(net: Network, mu: float, rng: np.random.Generator) -> Network:
    for c in net.connections:
        if c.kind == Kind.CONST:
            continue
        if rng.random() < mu:
            others = [k for k in VARIABLE_KINDS if k != c.kind]
            c.kind = others[int(rng.integers(2))]
            _set_fresh_weight(c, rng, net.memristor)
    return net


def add_hidden(net: Network, rng: np.random.Generator) -> None:
    old_h = net.n_hidden
    first_o = N_INPUTS + old_h
    for c in net.connections:
        if c.post >= first_o:
            c.post += 1
    net.hidden_polarity.append(
        Polarity.EXCITATORY if rng.random() < 0.5 else Polarity.INHIBITORY)
    new = N_INPUTS + old_h
    pairs = [(i, new) for i in range(N_INPUTS)]
    pairs += [(new, r) for r in range(N_INPUTS, new)]
    pairs += [(new, new + 1 + o) for o in range(N_OUTPUTS)]
    for pre, post in pairs:
        enabled = bool(rng.random() < 0.5)
        net.connections.append(_new_connection(net, pre, post, rng, enabled))


def remove_hidden(net: Network, j: int) -> None:
    """Drop hidden neuron ``j`` (0-based within the layer) and its edges."""
    if net.n_hidden <= 1:
        return
    gone = N_INPUTS + j
    kept = [c for c in net.connections if c.pre != gone and c.post != gone]
    del net.hidden_polarity[j]
    for c in kept:
        if c.pre > gone:
            c.pre -= 1
        if c.post > gone:
            c.post -= 1
        c.delay = connection_delay(c.pre, c.post, net.layer_of(c.pre), net.layer_of(c.post))
    net.connections = kept


def node_event(net: Network, psi: float, omega: float, rng: np.random.Generator) -> Network:
    if rng.random() < psi:
        if rng.random() < omega:
            add_hidden(net, rng)
        elif net.n_hidden > 1:
            remove_hidden(net, int(rng.integers(net.n_hidden)))
    return net


def connection_event(net: Network, tau: float, rng: np.random.Generator) -> Network:
    for c in net.connections:
        if rng.random() < tau:
            c.enabled = not c.enabled
            if c.enabled:
                if net.kind == "het":
                    c.kind = _pick_kind("het", rng)
                _set_fresh_weight(c, rng, net.memristor)
    return net


def make_offspring(parent: Network, rng: np.random.Generator) -> Network:
    child = parent.copy()
    child.mu = self_adapt(parent.mu, rng)
    child.psi = self_adapt(parent.psi, rng)
    child.omega = self_adapt(parent.omega, rng)
    child.tau = self_adapt(parent.tau, rng)
    if child.kind == "ga":
        mutate_weights(child, child.mu, rng)
    elif child.kind == "het":
        mutate_types(child, child.mu, rng)
    node_event(child, child.psi, child.omega, rng)
    connection_event(child, child.tau, rng)
    child.fitness = 0.0
    child.goal = False
    child.rewards = 0
    child.reset_state()
    return child


# -- population ------------------------------------------------------------

Evaluator = Callable[[Network, int], None]


@dataclass
class Population:
    members: list[Network]
    system: str
    rng: np.random.Generator
    generation: int = 0
    births: int = 0
    evaluations: int = 0
    history: list[tuple[int, int, float, bool, int]] = field(default_factory=list)

    @classmethod
    def initial(cls, system: str, size: int, rng: np.random.Generator,
                evaluate: Evaluator, params: NetworkParams = NetworkParams(),
                memristor: MemristorParams = MemristorParams()) -> "Population":
        pop = cls([], system, rng)
        for _ in range(size):
            net = random_network(system, rng, params, memristor)
            pop._admit(net, evaluate)
        return pop

    def _admit(self, net: Network, evaluate: Evaluator) -> None:
        net.birth = self.births
        self.births += 1
        evaluate(net, self.evaluations)
        self.history.append((self.generation, self.evaluations, net.fitness,
                             net.goal, net.rewards))
        self.evaluations += 1
        self.members.append(net)

    def best(self) -> Network:
        return max(self.members, key=lambda m: (m.fitness, -m.birth))

    def ga_cycle(self, evaluate: Evaluator) -> list[Network]:
        """One steady-state generation; returns the two offspring."""
        self.generation += 1
        parents = [select_parent(self.members, self.rng) for _ in range(2)]
        children = [make_offspring(p, self.rng) for p in parents]
        for child in children:
            self._admit(child, evaluate)
        # lowest fitness first, oldest first among equals
        doomed = sorted(self.members, key=lambda m: (m.fitness, m.birth))[:2]
        ids = {id(m) for m in doomed}
        self.members = [m for m in self.members if id(m) not in ids]
        return children
