import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memevo import records
from memevo.arena import LOG_COLUMNS, Scenario
from memevo.evolution import random_network
from memevo.harness import (PROFILES, RunConfig, derive_seed, load_run, make_config,
                            merge_census, performance_metric, run_experiment,
                            stdp_trace, topology_census, compare_runs)
from memevo.snn import Network, Polarity
from memevo.synapse import Connection, Kind

TINY = dict(population=4, generations=3, interval=1, repeats=2)


def test_profiles():
    assert PROFILES["paper"] == dict(population=100, generations=1000, interval=20, repeats=30)
    assert PROFILES["desk"] == dict(population=40, generations=300, interval=20, repeats=10)
    cfg = make_config("desk", system="ga")
    assert (cfg.population, cfg.generations, cfg.repeats) == (40, 300, 10)
    assert RunConfig().population == 100


def test_dotted_overrides():
    cfg = make_config("desk", {"snn.a": "0.25", "mem.beta": "50", "arena.slippage": "0.2",
                               "run.repeats": "3", "arena.fitness_abs": "true"})
    assert cfg.params.a == 0.25 and cfg.memristor.beta == 50.0
    assert cfg.arena.slippage == 0.2 and cfg.repeats == 3 and cfg.arena.fitness_abs
    with pytest.raises(ValueError):
        make_config("desk", {"snn.nope": "1"})
    with pytest.raises(ValueError):
        make_config("desk", {"bogus": "1"})
    with pytest.raises(ValueError):
        make_config("desk", system="xyz")


def test_config_parser():
    text = "# comment\nsnn.a = 0.3\n\nrun.seed=4  # trailing\n"
    assert records.parse_config(text) == {"snn.a": "0.3", "run.seed": "4"}
    with pytest.raises(ValueError):
        records.parse_config("not a pair")


def test_seed_splitting_is_stable():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert derive_seed(1, 2) != derive_seed(1, 3)
    assert 0 <= derive_seed(5, 0) < 2**63


def test_performance_metric():
    hist = [(0, 0, 1.0, False, 0), (0, 1, 2.0, True, 0), (1, 2, 0.0, True, 0)]
    assert performance_metric(hist, Scenario.STATIC, 10) == 0
    assert performance_metric([(0, 0, 1.0, False, 0)], Scenario.STATIC, 10) == 11
    dyn = [(0, 0, 0, False, 0), (0, 1, 1, True, 1), (1, 2, 1, True, 1), (1, 3, 2, True, 2)]
    assert performance_metric(dyn, Scenario.DYNAMIC, 2, 4) == 2
    assert performance_metric(dyn[:3], Scenario.DYNAMIC, 2, 4) == 4


def _fixture_net():
    # hidden 6 exc, hidden 7 inh; outputs 8, 9
    net = Network(hidden_polarity=[Polarity.EXCITATORY, Polarity.INHIBITORY], connections=[
        Connection(0, 6, Kind.HP),             # light -> hidden
        Connection(4, 7, Kind.PEO),            # ir -> hidden (inhibitory post)
        Connection(7, 6, Kind.PEO, delay=1),   # hidden inh -> hidden exc
        Connection(6, 9, Kind.LIN, enabled=False),
    ])
    net.validate()
    return net


def test_census_by_hand():
    cen = topology_census(_fixture_net())
    assert cen["HP"] == dict(input_hidden=1, hidden_hidden=0, hidden_output=0,
                             pre_excitatory=1, pre_inhibitory=0, post_excitatory=1,
                             post_inhibitory=0, ir=0, light=1)
    assert cen["PEO"] == dict(input_hidden=1, hidden_hidden=1, hidden_output=0,
                              pre_excitatory=1, pre_inhibitory=1, post_excitatory=1,
                              post_inhibitory=1, ir=1, light=0)
    assert all(v == 0 for v in cen["LIN"].values())


def test_census_empty():
    net = _fixture_net()
    for c in net.connections:
        c.enabled = False
    assert all(v == 0 for row in topology_census(net).values() for v in row.values())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_census_partition(seed):
    rng = np.random.default_rng(seed)
    net = random_network("het", rng)
    for c in net.connections:
        c.enabled = bool(rng.random() < 0.6)
    cen = topology_census(net)
    layer_total = sum(r["input_hidden"] + r["hidden_hidden"] + r["hidden_output"] for r in cen.values())
    assert layer_total == len(net.enabled_connections())
    assert merge_census([cen, cen])["HP"]["input_hidden"] == 2 * cen["HP"]["input_hidden"]


def _log(rows):
    log = np.zeros((rows, len(LOG_COLUMNS)))
    log[:, 0] = np.arange(1, rows + 1)
    return log


def test_trace_constant():
    log = _log(30)
    log[:, LOG_COLUMNS.index("mean_w_hp")] = 0.37
    tr = stdp_trace(log)
    assert tr.shape[0] == 30
    assert np.allclose(tr[:, 7], 0.37)


def test_trace_impulse():
    log = _log(30)
    log[5, LOG_COLUMNS.index("pos_stdp_hp")] = 10
    tr = stdp_trace(log)[:, 1]
    # full trailing windows carry one tenth of the impulse
    assert np.allclose(tr[9:15], 1.0)
    assert np.all(tr[15:] == 0) and np.all(tr[:5] == 0)
    # before the window fills, the mean is over the rows seen so far
    assert tr[5] == pytest.approx(10 / 6)


def test_trace_skips_missing_kinds():
    log = _log(5)
    log[:, LOG_COLUMNS.index("mean_w_lin")] = np.nan
    assert np.isnan(stdp_trace(log)[:, 9]).all()


def test_network_round_trip(tmp_path):
    net = random_network("het", np.random.default_rng(3))
    net.fitness = 12.5
    records.save_network(tmp_path / "n.json", net)
    back = records.load_network(tmp_path / "n.json")
    assert records.network_to_dict(back) == records.network_to_dict(net)


def test_csv_header_and_floats(tmp_path):
    records.write_csv(tmp_path / "x.csv", "demo", ("a", "b"), [(1, 0.1 + 0.2), (True, float("nan"))])
    text = (tmp_path / "x.csv").read_text().splitlines()
    assert text[0] == "# memevo-schema: demo/1"
    assert text[2] == "1,0.3" and text[3] == "1,nan"
    schema, rows = records.read_csv(tmp_path / "x.csv")
    assert schema == "demo/1" and rows[0]["a"] == "1"


def test_experiment_outputs(tmp_path):
    cfg = make_config("desk", system="het", seed=5, **TINY)
    out = run_experiment(cfg, tmp_path / "run")
    names = sorted(p.name for p in out.iterdir())
    assert names == ["best_r00_trajectory.csv", "best_r01_trajectory.csv", "manifest.json",
                     "performance.csv", "population_r00.json", "population_r01.json",
                     "snapshots.csv"]
    run = load_run(out)
    assert not run["manifest"]["partial"]
    assert [int(r["evaluations"]) for r in run["performance"]] == [4 + 2 * 3] * 2
    snaps = run["snapshots"]
    assert len(snaps) == 2 * 4
    assert snaps[0]["neurons"] == "17" and snaps[0]["connectivity_pct"] == "100"
    for rep in ("0", "1"):
        best = [float(s["best_f"]) for s in snaps if s["repeat"] == rep]
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    pop = records.load_population(out / "population_r00.json")
    assert pop.evaluations == 10 and len(pop.members) == 4


def test_zero_generations_gives_one_snapshot(tmp_path):
    cfg = make_config("desk", system="ga", seed=1, population=3, generations=0, repeats=1)
    run = load_run(run_experiment(cfg, tmp_path / "g0"))
    assert len(run["snapshots"]) == 1


def test_experiment_deterministic_across_jobs(tmp_path):
    cfg = make_config("desk", system="peo", scenario="dynamic", seed=9, **TINY)
    a = run_experiment(cfg, tmp_path / "a", jobs=1)
    b = run_experiment(cfg, tmp_path / "b", jobs=2)
    for name in ("snapshots.csv", "performance.csv", "best_r01_trajectory.csv",
                 "population_r01.json", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_resumed_population_continues_identically(tmp_path):
    from memevo.evolution import Population
    from memevo.harness import make_evaluator
    cfg = make_config("desk", system="ga", seed=2, population=4, generations=6, repeats=1)
    ev = make_evaluator(cfg, 0)
    pop = Population.initial("ga", 4, np.random.default_rng(1), ev)
    for _ in range(3):
        pop.ga_cycle(ev)
    records.save_population(tmp_path / "p.json", pop)
    clone = records.load_population(tmp_path / "p.json")
    for _ in range(3):
        pop.ga_cycle(ev)
        clone.ga_cycle(ev)
    assert [m.fitness for m in pop.members] == [m.fitness for m in clone.members]


def test_compare_self_and_mismatch(tmp_path):
    cfg = make_config("desk", system="ga", seed=3, **TINY)
    run = load_run(run_experiment(cfg, tmp_path / "r"))
    report = compare_runs([run, run])
    for head in ("Performance", "High fitness", "Neurons", "Connectivity"):
        assert head in report
    pvals = report.strip().splitlines()[-1].split()[-4:]
    assert pvals == ["1", "1", "1", "1"]
    other = dict(run, manifest=json.loads(json.dumps(run["manifest"])))
    other["manifest"]["config"]["scenario"] = "dynamic"
    with pytest.raises(ValueError):
        compare_runs([run, other])
