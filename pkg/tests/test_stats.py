import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shorthrv.cohort import CohortRow, CohortTable
from shorthrv.errors import EmptyGroup, NonFiniteInput, SingleClassCohort
from shorthrv.hrv import HrvFeatures
from shorthrv.stats import exact_p, feature_significance, normal_p, rank_sum_test


def brute_force_p(a, b):
    """Enumerate every assignment of the pooled ranks to group a."""
    pooled = sorted(list(a) + list(b))
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    w = sum(rank[v] for v in a)
    sums = [sum(c) for c in itertools.combinations(range(1, len(pooled) + 1), len(a))]
    lo = sum(s <= w for s in sums)
    hi = sum(s >= w for s in sums)
    return min(1.0, (2 * min(lo, hi)) / len(sums))


def test_single_pair():
    r = rank_sum_test([1], [2])
    assert r.p_value == 1.0 and r.method == "exact" and r.w_statistic == 1


def test_separated_triples():
    r = rank_sum_test([1, 2, 3], [4, 5, 6])
    assert r.w_statistic == 6 and r.p_value == 0.1


def test_all_tied():
    r = rank_sum_test([5, 5, 5], [5, 5, 5])
    assert r.p_value == 1.0 and r.method == "normal_approx"
    assert r.w_statistic == 10.5


def test_errors():
    with pytest.raises(EmptyGroup):
        rank_sum_test([], [1])
    with pytest.raises(NonFiniteInput):
        rank_sum_test([1, np.nan], [2])
    with pytest.raises(ValueError):
        rank_sum_test([1], [2], alternative="less")


distinct = st.lists(st.integers(-10_000, 10_000), min_size=2, max_size=10, unique=True)


@settings(max_examples=150)
@given(distinct, st.data())
def test_exact_equals_enumeration(values, data):
    n_a = data.draw(st.integers(1, len(values) - 1))
    a, b = values[:n_a], values[n_a:]
    r = rank_sum_test(a, b)
    assert r.method == "exact"
    assert r.p_value == brute_force_p(a, b)


@settings(max_examples=100)
@given(distinct, st.data())
def test_symmetry_and_bounds(values, data):
    n_a = data.draw(st.integers(1, len(values) - 1))
    a, b = values[:n_a], values[n_a:]
    r, s = rank_sum_test(a, b), rank_sum_test(b, a)
    assert r.p_value == s.p_value
    assert 0 < r.p_value <= 1
    lo = n_a * (n_a + 1) / 2
    assert lo <= r.w_statistic <= lo + n_a * len(b)


@settings(max_examples=100)
@given(distinct, st.data())
def test_monotone_invariance(values, data):
    n_a = data.draw(st.integers(1, len(values) - 1))
    a, b = np.array(values[:n_a], float), np.array(values[n_a:], float)
    f = lambda v: np.exp(v / 5000.0) * 3 + 1
    r, s = rank_sum_test(a, b), rank_sum_test(f(a), f(b))
    assert (r.w_statistic, r.p_value) == (s.w_statistic, s.p_value)


def test_large_samples_use_normal():
    rng = np.random.default_rng(0)
    r = rank_sum_test(rng.normal(0, 1, 30), rng.normal(0, 1, 40))
    assert r.method == "normal_approx"


def test_normal_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(2)
    a, b = rng.normal(0.3, 1, 57), rng.normal(0, 1, 240)
    ours = rank_sum_test(a, b).p_value
    ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    assert ours == pytest.approx(ref, rel=1e-9)


def test_ties_normal_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    a = [1, 2, 2, 3, 3, 3, 7]
    b = [2, 3, 4, 4, 5, 6, 6, 8]
    ours = rank_sum_test(a, b).p_value
    ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    assert ours == pytest.approx(ref, rel=1e-9)


def test_extreme_p_stays_positive():
    r = rank_sum_test(np.arange(2000.0), np.arange(2000.0) + 10_000)
    assert 0 < r.p_value < 1e-300


def test_approximation_worst_case_small_group():
    # one-member group: exact p is 2/N at the extreme, the continuity-corrected normal
    # tail is far lighter; documents why the 0.02 agreement needs both groups >= 4
    n = 11
    assert exact_p(1, 1, n - 1) == pytest.approx(2 / 11)
    mu, sd = 6.0, math.sqrt(10 * 12 / 12)
    assert normal_p(1, 1, n - 1) == pytest.approx(math.erfc((abs(1 - mu) - 0.5) / sd / math.sqrt(2)))
    assert abs(normal_p(1, 1, n - 1) - exact_p(1, 1, n - 1)) > 0.02


def table(mci, non):
    rows = [CohortRow(f"M{i}", "MCI", HrvFeatures(v, v + 1, v / 10, v / 20, 60000 / v)) for i, v in enumerate(mci)]
    rows += [CohortRow(f"H{i}", "nonMCI", HrvFeatures(v, v + 1, v / 10, v / 20, 60000 / v)) for i, v in enumerate(non)]
    return CohortTable(rows)


def test_feature_significance_keys_and_direction():
    res = feature_significance(table([700, 710, 720, 730, 740], [900, 910, 920, 930, 940, 950]))
    assert list(res) == ["mean_nn", "rms_nn", "sdnn", "rmssd"]
    for r in res.values():
        assert r.n_a == 5 and r.n_b == 6 and r.w_statistic == 15 and r.significant()


def test_single_class_cohort():
    with pytest.raises(SingleClassCohort):
        feature_significance(table([], [800, 900]))
