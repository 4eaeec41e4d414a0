"""On-disk formats: CSV tables, network and population JSON, config files.

Every file is written to a temporary sibling and renamed into place.  CSV
files start with a ``# memevo-schema: <name>/<version>`` comment line.
Floats are written with 12 significant digits so repeated runs produce
byte-identical files.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .snn import Network, NetworkParams, Polarity
from .synapse import Connection, Kind, MemristorParams

SCHEMA_VERSION = 1
NETWORK_SCHEMA = "memevo.network/1"
POPULATION_SCHEMA = "memevo.population/1"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return format(v, ".12g")
    return str(v)


def write_csv(path, schema: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buf = io.StringIO()
    buf.write(f"# memevo-schema: {schema}/{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return atomic_write(path, buf.getvalue())


def read_csv(path) -> tuple[str, list[dict[str, str]]]:
    """Return ``(schema line, rows as dicts)``."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# memevo-schema:"):
            raise ValueError(f"{path}: missing schema header")
        rows = list(csv.DictReader(fh))
    return first.split(":", 1)[1].strip(), rows


# -- networks --------------------------------------------------------------

def network_to_dict(net: Network) -> dict:
    return {
        "schema": NETWORK_SCHEMA,
        "system": net.kind,
        "params": dataclasses.asdict(net.params),
        "memristor": dataclasses.asdict(net.memristor),
        "neurons": [{"index": i, "layer": net.layer_of(i).name.lower(),
                     "polarity": net.polarity_of(i).name.lower()}
                    for i in range(net.n_neurons)],
        "connections": [{"pre": c.pre, "post": c.post, "type": c.kind.name,
                         "enabled": c.enabled, "q": c.q, "weight": c.weight}
                        for c in net.connections],
        "mu": net.mu, "psi": net.psi, "omega": net.omega, "tau": net.tau,
        "fitness": net.fitness,
        "birth": net.birth, "trial_seed": net.trial_seed,
        "goal": net.goal, "rewards": net.rewards,
    }


def network_from_dict(d: dict) -> Network:
    if d.get("schema") != NETWORK_SCHEMA:
        raise ValueError(f"unsupported network schema {d.get('schema')!r}")
    from .snn import Layer, connection_delay

    params = NetworkParams(**d["params"])
    memristor = MemristorParams(**d["memristor"])
    hidden = [Polarity[n["polarity"].upper()] for n in d["neurons"] if n["layer"] == "hidden"]
    net = Network(hidden_polarity=hidden, connections=[], kind=d["system"],
                  mu=d["mu"], psi=d["psi"], omega=d["omega"], tau=d["tau"],
                  fitness=d["fitness"], params=params, memristor=memristor,
                  birth=d.get("birth", 0), trial_seed=d.get("trial_seed", 0),
                  goal=d.get("goal", False), rewards=d.get("rewards", 0))
    for c in d["connections"]:
        pre, post = c["pre"], c["post"]
        net.connections.append(Connection(
            pre, post, Kind[c["type"]], bool(c["enabled"]), float(c["q"]),
            float(c["weight"]),
            connection_delay(pre, post, net.layer_of(pre), net.layer_of(post))))
    net.validate()
    net.reset_state()
    return net


def save_network(path, net: Network) -> Path:
    return atomic_write(path, json.dumps(network_to_dict(net), indent=1) + "\n")


def load_network(path) -> Network:
    return network_from_dict(json.loads(Path(path).read_text()))


def population_to_dict(pop, extra: dict | None = None) -> dict:
    return {
        "schema": POPULATION_SCHEMA,
        "system": pop.system,
        "generation": pop.generation,
        "births": pop.births,
        "evaluations": pop.evaluations,
        "rng_state": pop.rng.bit_generator.state,
        "history": [list(h) for h in pop.history],
        "members": [network_to_dict(m) for m in pop.members],
        **(extra or {}),
    }


def population_from_dict(d: dict):
    from .evolution import Population

    if d.get("schema") != POPULATION_SCHEMA:
        raise ValueError(f"unsupported population schema {d.get('schema')!r}")
    rng = np.random.default_rng()
    rng.bit_generator.state = d["rng_state"]
    return Population(
        members=[network_from_dict(m) for m in d["members"]],
        system=d["system"], rng=rng, generation=d["generation"],
        births=d["births"], evaluations=d["evaluations"],
        history=[tuple(h) for h in d["history"]],
    )


def save_population(path, pop, extra: dict | None = None) -> Path:
    return atomic_write(path, json.dumps(population_to_dict(pop, extra)) + "\n")


def load_population(path):
    return population_from_dict(json.loads(Path(path).read_text()))


# -- config files ----------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines with dotted keys; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out
