import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memevo.synapse import (Connection, Kind, MemristorParams, VARIABLE_KINDS,
                            characterize, init_q_for_weight, memristance,
                            q_max, reset_connection, stdp_update, weight,
                            weight_hp, weight_lin, weight_peo, weight_range)

P = MemristorParams()


def test_q_max_value():
    # (R_on - R_off) / (-R_on R_off beta) with the default device
    assert q_max(P) == pytest.approx(0.99, abs=1e-15)
    assert P.dq == pytest.approx(0.99e-3, abs=1e-18)


def test_memristance_endpoints():
    assert memristance(0.0, P) == P.r_off
    assert memristance(P.q_max, P) == pytest.approx(P.r_on, abs=1e-15)


def test_memristance_rejects_out_of_range_charge():
    with pytest.raises(ValueError):
        memristance(-0.1, P)
    with pytest.raises(ValueError):
        memristance(1.5, P)


def test_bad_device_parameters():
    with pytest.raises(ValueError):
        MemristorParams(r_on=1.0, r_off=0.5)
    with pytest.raises(ValueError):
        MemristorParams(beta=0)


@pytest.mark.parametrize("kind, lo, hi", [(Kind.HP, 0.01, 1.0), (Kind.PEO, 0.0, 0.99),
                                          (Kind.LIN, 0.0, 1.0)])
def test_weight_ranges(kind, lo, hi):
    a, b = weight_range(kind, P)
    assert a == pytest.approx(lo, abs=1e-12)
    assert b == pytest.approx(hi, abs=1e-12)


def test_named_maps_agree_with_dispatch():
    for q in np.linspace(0, P.q_max, 17):
        m = memristance(q, P)
        assert weight(Kind.HP, q, P) == weight_hp(m, P)
        assert weight(Kind.PEO, q, P) == weight_peo(m, P)
        assert weight(Kind.LIN, q, P) == weight_lin(q, P)


def test_const_has_no_charge_map():
    with pytest.raises(ValueError):
        weight(Kind.CONST, 0.0, P)


@pytest.mark.parametrize("kind, q0", [(Kind.HP, 0.98), (Kind.PEO, 0.01), (Kind.LIN, 0.495)])
def test_initial_charge_for_half_weight(kind, q0):
    q = init_q_for_weight(kind, 0.5, P)
    assert q == pytest.approx(q0, abs=1e-12)
    assert weight(kind, q, P) == pytest.approx(0.5, abs=1e-12)


def test_stdp_sign_rule():
    c = Connection(0, 1, Kind.LIN, q=0.5)
    assert stdp_update(c, 2, 3, 4, P).positive
    assert c.q == 0.5 + P.dq
    assert not stdp_update(c, 3, 2, 4, P).positive
    assert stdp_update(c, 3, 3, 4, P) is None
    assert stdp_update(c, 1, 3, 4, P) is None  # sum 4 is not above threshold
    assert stdp_update(c, 0, 0, 4, P) is None


def test_const_and_disabled_connections_ignore_stdp():
    c = Connection(0, 1, Kind.CONST, weight=0.3)
    assert stdp_update(c, 2, 3, 4, P) is None and c.weight == 0.3
    d = Connection(0, 1, Kind.HP, enabled=False, q=0.5)
    assert stdp_update(d, 2, 3, 4, P) is None and d.q == 0.5


def test_charge_saturates():
    c = Connection(0, 1, Kind.HP, q=P.q_max)
    stdp_update(c, 2, 3, 4, P)
    assert c.q == P.q_max
    c = Connection(0, 1, Kind.HP, q=0.0)
    stdp_update(c, 3, 2, 4, P)
    assert c.q == 0.0


def test_reset_connection_restores_half_weight():
    c = Connection(0, 1, Kind.PEO, q=0.7)
    reset_connection(c, P)
    assert c.weight == pytest.approx(0.5, abs=1e-12)


def test_characterize_shape():
    rows = list(characterize(P))
    assert len(rows) == 3 * 2001
    hp = [r for r in rows if r[0] == "HP"]
    assert hp[0][4] == pytest.approx(0.01)
    assert hp[1000][4] == pytest.approx(1.0, abs=1e-12)
    assert hp[2000][2] == pytest.approx(0.0, abs=1e-12)
    peo = [r for r in rows if r[0] == "PEO"]
    assert peo[0][4] == 0.0


def test_hp_sensitive_range_is_at_the_top():
    hp = [r for r in characterize(P, (Kind.HP,))]
    assert hp[910][4] == pytest.approx(0.101, abs=0.01)
    assert all(r[4] < 0.1 for r in hp[:910])


def test_peo_rises_fast():
    peo = [r for r in characterize(P, (Kind.PEO,))]
    assert peo[90][4] == pytest.approx(0.908, abs=0.01)


@given(st.floats(0.0, 1.0))
def test_peo_hp_mirror(frac):
    q = frac * P.q_max
    assert weight(Kind.PEO, q, P) + weight(Kind.HP, P.q_max - q, P) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_weight_maps_monotone(a, b):
    qa, qb = sorted((a * P.q_max, b * P.q_max))
    for kind in VARIABLE_KINDS:
        assert weight(kind, qa, P) <= weight(kind, qb, P)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=60),
       st.sampled_from(VARIABLE_KINDS), st.floats(0.0, 1.0))
def test_charge_stays_in_range(seq, kind, frac):
    c = Connection(0, 1, kind, q=frac * P.q_max)
    for a, b in seq:
        stdp_update(c, a, b, 4, P)
        assert 0.0 <= c.q <= P.q_max
        lo, hi = weight_range(kind, P)
        assert lo - 1e-12 <= c.weight <= hi + 1e-12
