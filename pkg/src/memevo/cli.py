"""Command-line entry point: ``memevo <command> [flags]``.

Exit codes: 0 on success, 1 on runtime or I/O failure, 2 on usage errors
(bad flag values, unknown config keys, missing inputs).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, records
from .arena import LOG_COLUMNS, Scenario, run_trial
from .evolution import SYSTEMS
from .synapse import MemristorParams, characterize

SCHEMAS = f"""\
output files (CSV files begin with a '# memevo-schema: <name>/1' line):
  snapshots.csv        {', '.join(harness.SNAPSHOT_COLUMNS)}
  performance.csv      {', '.join(harness.PERFORMANCE_COLUMNS)}
  best_rXX_trajectory.csv, replay output
                       {', '.join(LOG_COLUMNS)}
  characterize output  kind, step, q, M, W
  census output        {', '.join(harness.CENSUS_COLUMNS)}
  trace output         {', '.join(harness.TRACE_COLUMNS)}
  population_rXX.json  generation, rng state, history and every network
  manifest.json        config, per-repeat seeds, file list, partial flag

environment:
  MEMEVO_OUT           default output root (default: ./runs)
"""


class UsageError(Exception):
    pass


def _out_root() -> Path:
    return Path(os.environ.get("MEMEVO_OUT", "runs"))


def _parse_sets(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_run(args) -> int:
    overrides = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        overrides.update(records.parse_config(path.read_text()))
    overrides.update(_parse_sets(args.set))
    try:
        cfg = harness.make_config(
            args.profile, overrides, system=args.system, scenario=args.scenario,
            seed=args.seed, population=args.population, generations=args.generations,
            repeats=args.repeats, interval=args.interval)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out) if args.out else (
        _out_root() / f"{cfg.system}_{cfg.scenario.value}_{cfg.profile}_s{cfg.seed}")

    def progress(res):
        if not args.quiet:
            print(f"repeat {res.repeat}: performance {res.performance}, "
                  f"best fitness {res.snapshots[-1][2]:.6g}", file=sys.stderr)

    harness.run_experiment(cfg, out, jobs=args.jobs or os.cpu_count() or 1, progress=progress)
    print(out)
    return 0


def cmd_characterize(args) -> int:
    rows = list(characterize(MemristorParams()))
    records.write_csv(args.out, "characterize", ("kind", "step", "q", "M", "W"), rows)
    print(args.out)
    return 0


def _load_networks(path: Path, best_only: bool):
    if not path.is_file():
        raise UsageError(f"file not found: {path}")
    data = json.loads(path.read_text())
    if data.get("schema") == records.POPULATION_SCHEMA:
        pop = records.population_from_dict(data)
        return [pop.best()] if best_only else pop.members
    return [records.network_from_dict(data)]


def cmd_census(args) -> int:
    nets = []
    for p in args.inputs:
        p = Path(p)
        files = sorted(p.glob("population_r*.json")) if p.is_dir() else [p]
        if not files:
            raise UsageError(f"no population files in {p}")
        for f in files:
            nets.extend(_load_networks(f, args.best_only))
    total = harness.merge_census(harness.topology_census(n) for n in nets)
    rows = [(kind, *(row[c] for c in harness.CENSUS_COLUMNS[1:])) for kind, row in total.items()]
    if args.out:
        records.write_csv(args.out, "census", harness.CENSUS_COLUMNS, rows)
        print(args.out)
    else:
        print(",".join(harness.CENSUS_COLUMNS))
        for r in rows:
            print(",".join(records.fmt(v) for v in r))
    return 0


def cmd_trace(args) -> int:
    path = Path(args.log)
    if not path.is_file():
        raise UsageError(f"file not found: {path}")
    _, rows = records.read_csv(path)
    if not rows:
        raise UsageError(f"{path}: empty trajectory log")
    log = np.array([[float(r[c]) for c in LOG_COLUMNS] for r in rows])
    trace = harness.stdp_trace(log, args.window)
    records.write_csv(args.out, "trace", harness.TRACE_COLUMNS, trace.tolist())
    print(args.out)
    return 0


def cmd_compare(args) -> int:
    if len(args.runs) < 2:
        raise UsageError("compare needs at least two run directories")
    runs = []
    for d in args.runs:
        if not Path(d).is_dir():
            raise UsageError(f"run directory not found: {d}")
        try:
            runs.append(harness.load_run(d))
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from exc
    try:
        report = harness.compare_runs(runs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        records.atomic_write(args.out, report)
    sys.stdout.write(report)
    return 0


def cmd_replay(args) -> int:
    path = Path(args.network)
    net = _load_networks(path, True)[0]
    saved = json.loads(path.read_text()).get("scenario", "static")
    scenario = Scenario(args.scenario or saved)
    seed = net.trial_seed if args.seed is None else args.seed
    res = run_trial(net, scenario=scenario, seed=seed, log=True)
    records.write_csv(args.out, "trajectory", LOG_COLUMNS, res.log.tolist())
    print(f"fitness {res.fitness:.6g} timesteps {res.timesteps} goal {int(res.goal)} "
          f"rewards {res.rewards}", file=sys.stderr)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="memevo", description="Evolve memristive spiking controllers.",
                                epilog=SCHEMAS, formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an evolutionary experiment", epilog=SCHEMAS,
                       formatter_class=fmt)
    r.add_argument("--system", choices=SYSTEMS, required=True)
    r.add_argument("--scenario", choices=[s.value for s in Scenario], help="default: static")
    r.add_argument("--profile", choices=sorted(harness.PROFILES), default="paper")
    r.add_argument("--seed", type=int, help="master seed (default: 0)")
    r.add_argument("--out", help="run directory (default: $MEMEVO_OUT/<system>_<scenario>_<profile>_s<seed>)")
    r.add_argument("--jobs", type=int, default=None, help="parallel repeats (default: all cores)")
    r.add_argument("--config", help="key=value file with dotted keys (snn.a=0.3, run.repeats=5)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override, repeatable")
    r.add_argument("--population", type=int)
    r.add_argument("--generations", type=int)
    r.add_argument("--repeats", type=int)
    r.add_argument("--interval", type=int, help="snapshot interval in generations")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("characterize", help="device response under synthetic STDP events")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_characterize)

    n = sub.add_parser("census", help="count enabled connections by kind, layer, polarity, sensor")
    n.add_argument("inputs", nargs="+", help="population/network JSON files or run directories")
    n.add_argument("--best-only", action="store_true", help="only the fittest network of each population")
    n.add_argument("--out")
    n.set_defaults(func=cmd_census)

    t = sub.add_parser("trace", help="moving averages of STDP counts and weights from a trajectory log")
    t.add_argument("--log", required=True)
    t.add_argument("--window", type=int, default=10)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_trace)

    m = sub.add_parser("compare", help="Welch t-test comparison of run directories")
    m.add_argument("--runs", nargs="+", required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_compare)

    y = sub.add_parser("replay", help="re-run a saved network with a trajectory log")
    y.add_argument("--network", required=True, help="network JSON, or population JSON (best member)")
    y.add_argument("--scenario", choices=[s.value for s in Scenario],
                   help="default: the scenario recorded in a population file, else static")
    y.add_argument("--seed", type=int, help="trial seed (default: the seed of its last evaluation)")
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be positive")
    if getattr(args, "window", None) is not None and args.window < 1:
        parser.error("--window must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"memevo: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
