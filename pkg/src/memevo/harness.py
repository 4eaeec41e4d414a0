"""Experiment orchestration, run metrics and post-hoc analyses.

A run is ``repeats`` independent evolutionary searches of one system on one
scenario.  Every repeat draws from its own generator, seeded from the master
seed by :func:`derive_seed`, so repeats can run in any order or in parallel
without changing a byte of output.

Seed splitting rule: the value for a key tuple ``(master, *keys)`` is the
first 64-bit word of ``numpy.random.SeedSequence([master, *keys])``.  Repeat
``i`` evolves with ``SeedSequence([master, i])`` and its evaluation number
``e`` runs its trial with seed ``derive_seed(master, i, 1, e)``.
"""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import records
from .arena import LOG_COLUMNS, ArenaConfig, Scenario, run_trial
from .evolution import SYSTEMS, Population
from .snn import Layer, Network, NetworkParams, Polarity
from .stats import welch_t_test
from .synapse import Kind, MemristorParams

SNAPSHOT_COLUMNS = ("repeat", "generation", "best_f", "mean_f", "neurons",
                    "connectivity_pct", "mu", "psi", "omega", "tau", "solved")
PERFORMANCE_COLUMNS = ("repeat", "seed", "performance", "high_fitness", "neurons",
                       "connectivity_pct", "solved", "evaluations")
CENSUS_COLUMNS = ("kind", "input_hidden", "hidden_hidden", "hidden_output",
                  "pre_excitatory", "pre_inhibitory", "post_excitatory",
                  "post_inhibitory", "ir", "light")
COMPARE_METRICS = ("performance", "high_fitness", "neurons", "connectivity_pct")
COMPARE_HEADERS = ("Performance", "High fitness", "Neurons", "Connectivity")


# -- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    system: str = "het"
    scenario: Scenario = Scenario.STATIC
    population: int = 100
    generations: int = 1000
    interval: int = 20
    repeats: int = 30
    seed: int = 0
    params: NetworkParams = NetworkParams()
    memristor: MemristorParams = MemristorParams()
    arena: ArenaConfig = ArenaConfig()
    profile: str = "paper"

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}; choose from {SYSTEMS}")
        if not isinstance(self.scenario, Scenario):
            object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.population < 2:
            raise ValueError("population must hold at least two networks")
        if self.generations < 0 or self.repeats < 1 or self.interval < 1:
            raise ValueError("generations >= 0, repeats >= 1 and interval >= 1 required")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def evaluations(self) -> int:
        return self.population + 2 * self.generations

    def to_dict(self) -> dict:
        return {
            "system": self.system, "scenario": self.scenario.value,
            "population": self.population, "generations": self.generations,
            "interval": self.interval, "repeats": self.repeats, "seed": self.seed,
            "profile": self.profile,
            "snn": dataclasses.asdict(self.params),
            "mem": dataclasses.asdict(self.memristor),
            "arena": {k: list(v) if isinstance(v, tuple) else v
                      for k, v in dataclasses.asdict(self.arena).items()},
        }


PROFILES = {
    "paper": dict(population=100, generations=1000, interval=20, repeats=30),
    "desk": dict(population=40, generations=300, interval=20, repeats=10),
}

_RUN_KEYS = {"system", "scenario", "population", "generations", "interval", "repeats", "seed"}


def _coerce(text: str, default):
    if isinstance(default, bool):
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        return tuple(float(v) for v in text.split(","))
    return text


def _replace(obj, section: str, values: dict[str, str]):
    known = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
    changes = {}
    for key, text in values.items():
        if key not in known:
            raise ValueError(f"unknown key {section}.{key}")
        changes[key] = _coerce(text, known[key])
    return dataclasses.replace(obj, **changes) if changes else obj


def make_config(profile: str = "paper", overrides: Optional[dict[str, str]] = None,
                **run_fields) -> RunConfig:
    """Build a config from a named profile, dotted ``key=value`` overrides
    (``snn.*``, ``mem.*``, ``arena.*``, ``run.*``) and explicit fields.

    Explicit keyword fields win over overrides, which win over the profile.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    sections: dict[str, dict[str, str]] = {"snn": {}, "mem": {}, "arena": {}, "run": {}}
    for key, value in (overrides or {}).items():
        head, _, tail = key.partition(".")
        if head not in sections or not tail:
            raise ValueError(f"bad config key {key!r}")
        sections[head][tail] = value
    base = RunConfig(profile=profile, **PROFILES[profile])
    run = {}
    for key, text in sections["run"].items():
        if key not in _RUN_KEYS:
            raise ValueError(f"unknown key run.{key}")
        run[key] = text if key in ("system", "scenario") else int(text)
    run.update({k: v for k, v in run_fields.items() if v is not None})
    if "scenario" in run and not isinstance(run["scenario"], Scenario):
        run["scenario"] = Scenario(run["scenario"])
    return dataclasses.replace(
        base,
        params=_replace(base.params, "snn", sections["snn"]),
        memristor=_replace(base.memristor, "mem", sections["mem"]),
        arena=_replace(base.arena, "arena", sections["arena"]),
        **run,
    )


def derive_seed(master: int, *keys: int) -> int:
    """Stable 63-bit seed for a key path below ``master``."""
    word = np.random.SeedSequence([master, *keys]).generate_state(1, np.uint64)[0]
    return int(word >> np.uint64(1))


# -- one repeat ------------------------------------------------------------

def solved(net: Network, scenario: Scenario) -> bool:
    """Goal criterion: static goal line, or both rewards when dynamic."""
    return net.rewards >= 2 if scenario is Scenario.DYNAMIC else net.goal


def make_evaluator(cfg: RunConfig, repeat: int):
    def evaluate(net: Network, eval_index: int) -> None:
        net.trial_seed = derive_seed(cfg.seed, repeat, 1, eval_index)
        res = run_trial(net, cfg.arena, cfg.scenario, net.trial_seed)
        net.fitness = res.fitness
        net.goal = res.goal
        net.rewards = res.rewards
    return evaluate


def snapshot_row(repeat: int, pop: Population, solved_yet: bool) -> tuple:
    fit = [m.fitness for m in pop.members]

    def mean(vals):
        return math.fsum(vals) / len(vals)

    return (repeat, pop.generation, max(fit), mean(fit),
            mean([m.connected_neurons() for m in pop.members]),
            mean([m.connectivity() for m in pop.members]),
            mean([m.mu for m in pop.members]), mean([m.psi for m in pop.members]),
            mean([m.omega for m in pop.members]), mean([m.tau for m in pop.members]),
            solved_yet)


def performance_metric(history: Sequence[tuple], scenario: Scenario,
                       generations: int, evaluations: Optional[int] = None) -> int:
    """Run performance from an evaluation history ``(gen, eval, f, goal, rewards)``.

    Static: first generation in which any evaluated network reached the goal,
    ``generations + 1`` if none did.  Dynamic: evaluations between the first
    trial earning one reward and the first earning both; the total number of
    evaluations if the second reward was never found.
    """
    if scenario is Scenario.DYNAMIC:
        total = len(history) if evaluations is None else evaluations
        first1 = next((e for _, e, _, _, r in history if r >= 1), None)
        first2 = next((e for _, e, _, _, r in history if r >= 2), None)
        if first1 is None or first2 is None:
            return total
        return first2 - first1
    return next((g for g, _, _, goal, _ in history if goal), generations + 1)


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    snapshots: list[tuple]
    performance: int
    population: Population
    best: Network
    trajectory: np.ndarray
    solved: bool


def run_repeat(cfg: RunConfig, repeat: int) -> RepeatResult:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, repeat]))
    evaluate = make_evaluator(cfg, repeat)
    pop = Population.initial(cfg.system, cfg.population, rng, evaluate,
                             cfg.params, cfg.memristor)
    found = any(solved(m, cfg.scenario) for m in pop.members)
    rows = [snapshot_row(repeat, pop, found)]
    for _ in range(cfg.generations):
        children = pop.ga_cycle(evaluate)
        found = found or any(solved(c, cfg.scenario) for c in children)
        if pop.generation % cfg.interval == 0 or pop.generation == cfg.generations:
            rows.append(snapshot_row(repeat, pop, found))
    assert pop.evaluations == cfg.evaluations
    perf = performance_metric(pop.history, cfg.scenario, cfg.generations, pop.evaluations)
    best = pop.best()
    probe = best.copy()
    res = run_trial(probe, cfg.arena, cfg.scenario, best.trial_seed, log=True)
    return RepeatResult(repeat, derive_seed(cfg.seed, repeat), rows, perf, pop, best,
                        res.log, found)


def _run_repeat_job(args):
    return run_repeat(*args)


# -- run directory ---------------------------------------------------------

def _manifest(cfg: RunConfig, done: list[int], files: list[str], partial: bool) -> dict:
    return {
        "schema": "memevo.manifest/1",
        "config": cfg.to_dict(),
        "seed_rule": "SeedSequence([master, repeat]); trial seed derive_seed(master, repeat, 1, eval)",
        "repeat_seeds": {str(r): derive_seed(cfg.seed, r) for r in range(cfg.repeats)},
        "completed_repeats": done,
        "files": sorted(files),
        "partial": partial,
    }


def run_experiment(cfg: RunConfig, out, jobs: int = 1, progress=None) -> Path:
    """Run every repeat and write the run directory; returns its path.

    Files: ``snapshots.csv``, ``performance.csv``, ``population_rXX.json``,
    ``best_rXX_trajectory.csv`` and ``manifest.json``.  Each is rewritten
    atomically as repeats finish, so an interrupted run leaves a consistent
    prefix and a manifest with ``partial: true``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    done: list[int] = []
    snaps: list[tuple] = []
    perf: list[tuple] = []
    records.atomic_write(out / "manifest.json",
                         json.dumps(_manifest(cfg, done, files, True), indent=1) + "\n")
    tasks = [(cfg, r) for r in range(cfg.repeats)]
    jobs = max(1, min(jobs, cfg.repeats))
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        results = pool.map(_run_repeat_job, tasks) if pool else map(_run_repeat_job, tasks)
        for res in results:
            tag = f"r{res.repeat:02d}"
            snaps.extend(res.snapshots)
            last = res.snapshots[-1]
            perf.append((res.repeat, res.seed, res.performance, last[2], last[4], last[5],
                         res.solved, res.population.evaluations))
            records.save_population(out / f"population_{tag}.json", res.population,
                                    {"repeat": res.repeat, "scenario": cfg.scenario.value})
            records.write_csv(out / f"best_{tag}_trajectory.csv", "trajectory",
                              LOG_COLUMNS, res.trajectory.tolist())
            records.write_csv(out / "snapshots.csv", "snapshots", SNAPSHOT_COLUMNS, snaps)
            records.write_csv(out / "performance.csv", "performance", PERFORMANCE_COLUMNS, perf)
            files = sorted(set(files) | {f"population_{tag}.json", f"best_{tag}_trajectory.csv",
                                         "snapshots.csv", "performance.csv"})
            done.append(res.repeat)
            records.atomic_write(out / "manifest.json",
                                 json.dumps(_manifest(cfg, done, files, True), indent=1) + "\n")
            if progress:
                progress(res)
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    records.atomic_write(out / "manifest.json",
                         json.dumps(_manifest(cfg, done, files, False), indent=1) + "\n")
    return out


def load_run(path) -> dict:
    """Manifest plus parsed performance and snapshot tables of a run directory."""
    path = Path(path)
    if not (path / "manifest.json").is_file():
        raise FileNotFoundError(f"{path}: not a run directory (no manifest.json)")
    manifest = json.loads((path / "manifest.json").read_text())
    _, perf = records.read_csv(path / "performance.csv")
    _, snaps = records.read_csv(path / "snapshots.csv")
    return {"path": path, "manifest": manifest, "performance": perf, "snapshots": snaps}


# -- analyses --------------------------------------------------------------

def _empty_census() -> dict:
    return {c: 0 for c in CENSUS_COLUMNS[1:]}


def topology_census(net: Network) -> dict[str, dict[str, int]]:
    """Enabled connections per kind, bucketed by layer pair, polarity and sensor.

    Sensor buckets count connections whose presynaptic neuron is an input:
    inputs 0-2 are light sensors and 3-5 are IR sensors.
    """
    out = {k.name: _empty_census() for k in Kind}
    pair_names = {(Layer.INPUT, Layer.HIDDEN): "input_hidden",
                  (Layer.HIDDEN, Layer.HIDDEN): "hidden_hidden",
                  (Layer.HIDDEN, Layer.OUTPUT): "hidden_output"}
    for c in net.enabled_connections():
        row = out[c.kind.name]
        row[pair_names[(net.layer_of(c.pre), net.layer_of(c.post))]] += 1
        pre_pol = net.polarity_of(c.pre)
        post_pol = net.polarity_of(c.post)
        row["pre_excitatory" if pre_pol == Polarity.EXCITATORY else "pre_inhibitory"] += 1
        row["post_excitatory" if post_pol == Polarity.EXCITATORY else "post_inhibitory"] += 1
        if net.layer_of(c.pre) == Layer.INPUT:
            row["light" if c.pre < 3 else "ir"] += 1
    return out


def merge_census(censuses: Iterable[dict]) -> dict[str, dict[str, int]]:
    total = {k.name: _empty_census() for k in Kind}
    for cen in censuses:
        for kind, row in cen.items():
            for col, v in row.items():
                total[kind][col] += v
    return total


TRACE_COLUMNS = ("timestep", "pos_stdp_hp", "neg_stdp_hp", "pos_stdp_peo", "neg_stdp_peo",
                 "pos_stdp_lin", "neg_stdp_lin", "mean_w_hp", "mean_w_peo", "mean_w_lin")


def stdp_trace(log: np.ndarray, window: int = 10) -> np.ndarray:
    """Trailing moving average of STDP counts and mean weights per kind.

    ``log`` has the trajectory columns.  Row ``t`` of the result averages rows
    ``max(0, t - window + 1) .. t``; NaN entries (kind absent) are skipped and
    a window with no finite values stays NaN.
    """
    log = np.asarray(log, dtype=float)
    if log.ndim != 2 or len(log) == 0:
        raise ValueError("log must be a nonempty 2-D array")
    if window < 1:
        raise ValueError("window must be positive")
    cols = [LOG_COLUMNS.index(c) for c in TRACE_COLUMNS[1:]]
    vals = log[:, cols]
    finite = np.isfinite(vals)
    csum = np.vstack([np.zeros(len(cols)), np.cumsum(np.where(finite, vals, 0.0), axis=0)])
    ccnt = np.vstack([np.zeros(len(cols)), np.cumsum(finite, axis=0)])
    hi = np.arange(1, len(log) + 1)
    lo = np.maximum(hi - window, 0)
    s = csum[hi] - csum[lo]
    n = ccnt[hi] - ccnt[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(n > 0, s / np.maximum(n, 1), np.nan)
    return np.column_stack([log[:, LOG_COLUMNS.index("timestep")], avg])


def compare_runs(runs: Sequence[dict]) -> str:
    """Plain-text table of per-run means (sd) and pairwise Welch p-values."""
    if len(runs) < 2:
        raise ValueError("need at least two runs to compare")
    scen = {r["manifest"]["config"]["scenario"] for r in runs}
    if len(scen) > 1:
        raise ValueError(f"runs mix scenarios: {sorted(scen)}")
    names = [f"{r['manifest']['config']['system']}:{Path(r['path']).name}" for r in runs]
    samples = [{m: [float(row[m]) for row in r["performance"]] for m in COMPARE_METRICS}
               for r in runs]
    pairs = [(i, j) for i in range(len(runs)) for j in range(i + 1, len(runs))]
    width = max(12, *(len(n) for n in names),
                *(len(names[i]) + len(names[j]) + 4 for i, j in pairs)) + 2
    lines = [f"scenario: {scen.pop()}", "", "".ljust(width) + "".join(h.rjust(22) for h in COMPARE_HEADERS)]
    for name, smp in zip(names, samples):
        cells = []
        for m in COMPARE_METRICS:
            v = np.asarray(smp[m])
            sd = float(np.std(v, ddof=1)) if len(v) > 1 else float("nan")
            cells.append(f"{np.mean(v):.4g} ({sd:.4g})".rjust(22))
        lines.append(name.ljust(width) + "".join(cells))
    lines += ["", "Welch t-test p-values"]
    for i, j in pairs:
        cells = []
        for m in COMPARE_METRICS:
            a, b = samples[i][m], samples[j][m]
            p = welch_t_test(a, b)[2] if len(a) > 1 and len(b) > 1 else float("nan")
            cells.append(f"{p:.4g}".rjust(22))
        lines.append(f"{names[i]} vs {names[j]}".ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"
