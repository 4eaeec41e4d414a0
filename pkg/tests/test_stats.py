import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats as sps

from memevo.stats import betainc, student_t_sf2, welch_t_test


@pytest.mark.parametrize("a, b, x", [(0.5, 0.5, 0.3), (2, 3, 0.7), (10, 0.5, 0.95),
                                     (0.5, 20, 0.01), (50, 50, 0.5)])
def test_betainc_matches_reference(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-12)


def test_t_tail():
    assert student_t_sf2(0.0, 5) == pytest.approx(1.0)
    assert student_t_sf2(2.0, 10) == pytest.approx(2 * sps.t.sf(2.0, 10), abs=1e-12)


def test_identical_samples():
    t, _, p = welch_t_test([1, 2, 3], [1, 2, 3])
    assert t == 0 and p == pytest.approx(1.0)
    assert welch_t_test([4, 4, 4], [4, 4, 4])[2] == 1.0


def test_near_constant_separation():
    _, _, p = welch_t_test([0, 0, 0, 0], [1, 1, 1, 1.0001])
    assert p < 0.001


def test_zero_variance_distinct_means():
    t, _, p = welch_t_test([1, 1], [2, 2])
    assert t == -math.inf and p == 0.0


def test_too_small():
    with pytest.raises(ValueError):
        welch_t_test([1], [1, 2])


@settings(max_examples=60)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=12),
       st.lists(st.floats(-100, 100), min_size=2, max_size=12))
def test_symmetry(a, b):
    if np.var(a) == 0 and np.var(b) == 0:
        return
    t1, d1, p1 = welch_t_test(a, b)
    t2, d2, p2 = welch_t_test(b, a)
    assert t1 == pytest.approx(-t2) and p1 == pytest.approx(p2) and 0 <= p1 <= 1


def test_agrees_with_permutation_ordering():
    # significance at 0.05 agrees with an exact-ish permutation test on
    # clearly separated or clearly overlapping samples
    rng = np.random.default_rng(0)
    agree = 0
    for k in range(20):
        shift = 3.0 if k % 2 else 0.0
        a = rng.normal(0, 1, 8)
        b = rng.normal(shift, 1, 8)
        p = welch_t_test(a, b)[2]
        pooled = np.concatenate([a, b])
        obs = abs(a.mean() - b.mean())
        perm = [abs(np.mean(x[:8]) - np.mean(x[8:]))
                for x in (rng.permutation(pooled) for _ in range(2000))]
        p_perm = (1 + sum(d >= obs for d in perm)) / 2001
        agree += (p < 0.05) == (p_perm < 0.05)
    assert agree == 20
