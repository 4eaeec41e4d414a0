import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memevo import kernel
from memevo.evolution import random_network
from memevo.snn import (Action, Activation, Layer, Network, NetworkParams, Polarity,
                        classify_window, connection_delay, decode_action,
                        run_step, run_timestep, step_neuron)
from memevo.synapse import Connection, Kind

from oracles import event_list_run, tonic_table

# unconnected neuron from y = 0.5: y <- 0.95 y + 0.3, spike above 1, reset to 0
TONIC = [0.775, None, 0.3, 0.585, 0.85575, None, 0.3, 0.585, 0.85575, None,
         0.3, 0.585, 0.85575, None, 0.3, 0.585, 0.85575, None, 0.3, 0.585, 0.85575]


def test_tonic_table_matches_hand_values():
    got = tonic_table()
    assert [i + 1 for i, (_, s) in enumerate(got) if s] == [2, 6, 10, 14, 18]
    for (y, s), want in zip(got, TONIC):
        assert s == (want is None)
        assert y == pytest.approx(0.0 if want is None else want, abs=1e-12)


def test_step_neuron_reproduces_tonic_trace():
    y = 0.5
    for want in TONIC:
        y, spiked = step_neuron(y, 0.0)
        assert spiked == (want is None)
        assert y == pytest.approx(0.0 if want is None else want, abs=1e-12)


def test_step_neuron_clamps_at_zero():
    y, spiked = step_neuron(0.1, -5.0)
    assert y == 0.0 and not spiked


def _empty_net(n_hidden=2):
    return Network(hidden_polarity=[Polarity.EXCITATORY] * n_hidden, connections=[])


def test_unconnected_network_fires_tonically():
    net = _empty_net()
    raster, y, _ = kernel.run_steps(net, np.zeros((21, 6)))
    spikes = [s + 1 for s in np.flatnonzero(raster[:, 7])]
    assert spikes == [2, 6, 10, 14, 18]
    # 5 spikes in a 21-step window classify as low on both outputs
    assert run_timestep(_empty_net(), np.zeros(6)) == Action.FORWARD


def test_window_classification_and_decoding():
    assert classify_window(10) == Activation.LOW
    assert classify_window(11) == Activation.HIGH
    assert decode_action(Activation.HIGH, Activation.LOW) == Action.LEFT
    assert decode_action(Activation.LOW, Activation.HIGH) == Action.RIGHT
    assert decode_action(Activation.HIGH, Activation.HIGH) == Action.FORWARD
    assert decode_action(Activation.LOW, Activation.LOW) == Action.FORWARD


def test_delays():
    assert connection_delay(9, 6) == 3
    assert connection_delay(0, 7, Layer.INPUT, Layer.HIDDEN) == 0
    assert connection_delay(8, 10, Layer.HIDDEN, Layer.OUTPUT) == 0
    with pytest.raises(ValueError):
        connection_delay(6, 9)


def test_params_validation():
    with pytest.raises(ValueError):
        NetworkParams(a=0)
    with pytest.raises(ValueError):
        NetworkParams(window_size=10)


def test_validate_rejects_upward_hidden_edge():
    net = _empty_net(3)
    net.connections.append(Connection(6, 8, Kind.HP, delay=0))
    with pytest.raises(ValueError):
        net.validate()


def test_ls_after_spike_is_two():
    net = _empty_net(1)
    for _ in range(2):
        spiked = run_step(net, np.zeros(6))
    assert 6 in spiked
    assert net.neurons[6].ls == 2


def test_delayed_spike_arrives_after_delay():
    # hidden 8 -> hidden 6 (delay 2); a strong input pushes 8 over threshold
    def build(link):
        conns = [Connection(0, 8, Kind.CONST, weight=1.0)]
        if link:
            conns.append(Connection(8, 6, Kind.CONST, weight=1.0, delay=2))
        net = Network(hidden_polarity=[Polarity.EXCITATORY] * 3, connections=conns)
        net.validate()
        return net

    sensors = np.zeros((8, 6))
    sensors[0, 0] = 1.0
    with_link, y_link, _ = kernel.run_steps(build(True), sensors)
    without, y_free, _ = kernel.run_steps(build(False), sensors)
    assert with_link[0, 0] and with_link[0, 8]
    # neuron 6 evolves identically until the spike lands two steps later
    diff = np.flatnonzero(with_link[:, 6] != without[:, 6])
    assert diff.size and diff[0] == 2
    assert (with_link[:2] == without[:2]).all()


def _random_case(seed):
    rng = np.random.default_rng(seed)
    system = ("het", "ga", "hp", "peo", "lin")[seed % 5]
    net = random_network(system, rng, n_hidden=int(rng.integers(1, 6)))
    for c in net.connections:
        if rng.random() < 0.3:
            c.enabled = False
    sensors = np.repeat(rng.random((50, 6)), 20, axis=0)
    return net, sensors


@pytest.mark.parametrize("seed", range(12))
def test_kernel_matches_event_list_oracle(seed):
    net, sensors = _random_case(seed)
    raster, y, q = kernel.run_steps(net, sensors)
    want_raster, want_y, want_q = event_list_run(net, sensors)
    got = [sorted(np.flatnonzero(r).tolist()) for r in raster]
    assert got == want_raster
    assert y.tolist() == want_y
    assert q.tolist() == want_q


@pytest.mark.parametrize("seed", range(6))
def test_kernel_matches_reference_engine(seed):
    net, sensors = _random_case(100 + seed)
    raster, y, q = kernel.run_steps(net, sensors[:300])
    ref = net.copy()
    for s in range(300):
        spiked = run_step(ref, sensors[s])
        assert sorted(spiked) == np.flatnonzero(raster[s]).tolist()
    assert [n.y for n in ref.neurons] == y.tolist()
    assert [c.q for c in ref.connections if c.enabled] == q.tolist()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_hidden_graph_is_acyclic(seed):
    net = random_network("het", np.random.default_rng(seed))
    for c in net.connections:
        if net.layer_of(c.pre) == net.layer_of(c.post) == Layer.HIDDEN:
            assert c.pre > c.post and c.delay == c.pre - c.post
