import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonlab.dist_core import PoissonParams, poisson_pmf_table, tv_distance
from poissonlab.process_sim import (
    METHODS,
    EventSequence,
    ProcessConfig,
    Subdivision,
    axiom_independence_check,
    axiom_rarity_check,
    axiom_stationarity_check,
    compare_methods,
    count_in,
    empirical_pmf,
    generate,
    rarity_reference_ratio,
    rate_estimate,
    simulate,
    simulate_counts,
    verify_conditional_uniformity,
    verify_poisson_law,
)
from poissonlab.stat_tests import CountHistogram


@pytest.mark.parametrize("kw", [dict(rate=1.0, horizon=0.0), dict(rate=0.0, horizon=1.0),
                                dict(rate=-2.0, horizon=1.0), dict(rate=math.inf, horizon=1.0),
                                dict(rate=1.0, horizon=1.0, method="thinning"),
                                dict(rate=1.0, horizon=1.0, seed=-1)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ProcessConfig(**kw)


@pytest.mark.parametrize("method", METHODS)
def test_mean_count(method):
    counts = simulate_counts(ProcessConfig(2.0, 3.0, seed=1, method=method), 100_000)
    assert abs(counts.mean() - 6.0) < 3 * math.sqrt(6.0 / 100_000)


@pytest.mark.parametrize("method", METHODS)
def test_sequences_valid(method):
    cfg = ProcessConfig(4.0, 2.5, seed=3, method=method)
    batch = simulate(cfg, 2000)
    for i in range(len(batch)):
        seq = batch.sequence(i)  # validates ordering and range
        assert len(seq) == batch.counts[i]
    assert np.all(batch.times > 0) and np.all(batch.times <= 2.5)


@pytest.mark.parametrize("method", METHODS)
def test_deterministic(method):
    cfg = ProcessConfig(1.5, 4.0, seed=42, method=method)
    a, b = simulate(cfg, 5000), simulate(cfg, 5000)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.times, b.times)
    assert generate(cfg) == a.sequence(0)


@pytest.mark.parametrize("method", METHODS)
def test_replicas_independent_of_batch_size(method):
    cfg = ProcessConfig(2.0, 3.0, seed=10, method=method)
    big = simulate(cfg, 5000)
    small = simulate(cfg, 37)
    assert np.array_equal(small.counts, big.counts[:37])
    assert np.array_equal(small.times, big.times[: big.offsets[37]])


def test_seeds_differ():
    a = simulate_counts(ProcessConfig(1.5, 4.0, seed=1), 1000)
    b = simulate_counts(ProcessConfig(1.5, 4.0, seed=2), 1000)
    assert not np.array_equal(a, b)


def test_counts_match_batch():
    cfg = ProcessConfig(3.0, 2.0, seed=7)
    assert np.array_equal(simulate_counts(cfg, 9000), simulate(cfg, 9000).counts)


def test_event_sequence_validation():
    with pytest.raises(ValueError):
        EventSequence([0.5, 0.5], 1.0)
    with pytest.raises(ValueError):
        EventSequence([0.0, 0.5], 1.0)
    with pytest.raises(ValueError):
        EventSequence([0.5, 1.5], 1.0)
    assert len(EventSequence([], 1.0)) == 0


def test_count_in_examples():
    seq = EventSequence([0.5, 1.5, 2.5], 3.0)
    assert count_in(seq, Subdivision([(0, 1), (1, 2)])).tolist() == [1, 1]
    # right endpoints belong to the interval
    assert count_in(EventSequence([1.0, 2.0], 2.0), Subdivision([(0, 1), (1, 2)])).tolist() == [1, 1]
    with pytest.raises(ValueError):
        count_in(seq, Subdivision([(2, 4)]))


def test_subdivision_rejects_overlap():
    with pytest.raises(ValueError):
        Subdivision([(0, 2), (1, 3)])
    with pytest.raises(ValueError):
        Subdivision([(1, 1)])
    Subdivision([(0, 1), (1, 2)])  # touching is fine


def test_batch_count_in_matches_scalar():
    cfg = ProcessConfig(5.0, 2.0, seed=4)
    batch = simulate(cfg, 300)
    sub = Subdivision([(0.1, 0.7), (0.7, 1.9)])
    per = batch.count_in(sub)
    for i in range(len(batch)):
        assert per[i].tolist() == count_in(batch.sequence(i), sub).tolist()


def test_empirical_pmf_examples():
    pmf = empirical_pmf(CountHistogram({0: 3, 2: 1}))
    assert pmf(0) == 0.75 and pmf(1) == 0.0 and pmf(2) == 0.25
    with pytest.raises(ValueError):
        empirical_pmf(CountHistogram({}))


def test_empirical_pmf_close_to_poisson():
    counts = simulate_counts(ProcessConfig(1.0, 1.0, seed=0), 100_000)
    emp = empirical_pmf(CountHistogram.from_counts(counts))
    assert tv_distance(emp, poisson_pmf_table(PoissonParams(1.0), 1e-14)) < 0.01


def test_zero_count_frequency():
    cfg = ProcessConfig(1.0, 2.0, seed=5)
    rep = verify_poisson_law(cfg, 100_000)
    assert rep.zero_expected == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert abs(rep.zero_frequency - rep.zero_expected) < 3 * rep.zero_std_error


def test_rarity_reference_values():
    assert rarity_reference_ratio(1e-6) == pytest.approx(5.000001666667e-7, rel=1e-9)
    assert rarity_reference_ratio(1.0) == pytest.approx(math.e - 2.0, rel=1e-14)
    # both branches agree near the switch point
    assert rarity_reference_ratio(0.999e-3) == pytest.approx((math.expm1(0.999e-3) - 0.999e-3) / 0.999e-3, rel=1e-10)
    with pytest.raises(ValueError):
        rarity_reference_ratio(0.0)


def test_rarity_check():
    cfg = ProcessConfig(2.0, 5.0, seed=8)
    rows = axiom_rarity_check(cfg, [1.0, 0.5, 0.25, 0.1], 20_000)
    ratios = [r.ratio for r in rows]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    for r in rows:
        assert r.z_score() < 4


def test_rarity_single_width_and_errors():
    cfg = ProcessConfig(1.0, 1.0, seed=0)
    assert len(axiom_rarity_check(cfg, [0.5], 1000)) == 1
    with pytest.raises(ValueError):
        axiom_rarity_check(cfg, [0.1, 0.5], 100)
    with pytest.raises(ValueError):
        axiom_rarity_check(cfg, [2.0], 100)
    with pytest.raises(ValueError):
        axiom_rarity_check(cfg, [], 100)


def test_rarity_undefined_without_singles():
    row = axiom_rarity_check(ProcessConfig(1e-9, 1.0, seed=0), [1e-3], 50)[0]
    assert row.singles == 0 and row.ratio is None and row.z_score() is None


def test_independence():
    res = axiom_independence_check(ProcessConfig(3.0, 4.0, seed=2), [(0, 1), (2, 4)], 100_000)
    assert abs(res.correlation) < 4 / math.sqrt(100_000)
    with pytest.raises(ValueError):
        axiom_independence_check(ProcessConfig(3.0, 4.0), [(0, 2), (1, 3)], 100)


def test_stationarity():
    res = axiom_stationarity_check(ProcessConfig(3.0, 4.0, seed=6), [(0.0, 1.5), (2.5, 4.0)], 100_000)
    assert res.p_value > 1e-3
    with pytest.raises(ValueError):
        axiom_stationarity_check(ProcessConfig(3.0, 4.0), [(0.0, 1.0), (2.0, 4.0)], 100)


def test_rate_estimate_examples():
    est = rate_estimate([(3, 1.0), (7, 3.0)])
    assert est.ratios == (3.0, 7 / 3) and est.pooled == 2.5
    for bad in ([], [(1, 0.0)], [(-1, 1.0)]):
        with pytest.raises(ValueError):
            rate_estimate(bad)


def test_rate_estimate_simulated():
    counts = simulate_counts(ProcessConfig(5.0, 10.0, seed=9), 100)
    est = rate_estimate([(c, 10.0) for c in counts])
    assert abs(est.pooled - 5.0) < 3 * math.sqrt(5.0 / 1000)


@pytest.mark.parametrize("method", METHODS)
def test_conditional_uniformity(method):
    assert verify_conditional_uniformity(ProcessConfig(2.0, 3.0, seed=1, method=method), 100_000).p_value > 1e-3


def test_compare_methods():
    assert compare_methods(ProcessConfig(2.0, 3.0, seed=1), 100_000).p_value > 1e-3


@given(st.floats(0.01, 20.0), st.floats(0.01, 20.0), st.integers(0, 2**32))
def test_generate_valid(rate, t, seed):
    seq = generate(ProcessConfig(rate, t, seed=seed))
    assert seq.horizon == t
    assert np.all(np.diff(seq.times) > 0)


def test_reference_examples():
    assert count_in(EventSequence([], 2.0), Subdivision([(0, 1), (1, 2)])).tolist() == [0, 0]
    seq = EventSequence([0.2, 0.9, 1.7], 2.0)
    assert count_in(seq, Subdivision([(0, 2)])).tolist() == [3]
    assert empirical_pmf(CountHistogram({0: 5, 1: 5})).probs.tolist() == [0.5, 0.5]
    pm = empirical_pmf(CountHistogram({3: 1}))
    assert pm.offset == 3 and pm.probs.tolist() == [1.0]
    assert rate_estimate([(6, 3.0)]).pooled == 2.0
    assert rate_estimate([(0, 1.0), (4, 1.0)]).pooled == 2.0


def test_rarity_long_horizon():
    rows = axiom_rarity_check(ProcessConfig(1.0, 10.0, seed=0), [0.5, 0.05, 0.005], 10_000)
    ratios = [r.ratio for r in rows]
    assert ratios[0] > ratios[1] > ratios[2]


def test_independence_rate_two():
    res = axiom_independence_check(ProcessConfig(2.0, 3.0, seed=1), [(0, 1), (2, 3)], 100_000)
    assert abs(res.correlation) < 4 / math.sqrt(100_000)


def test_independence_undefined_for_constant_counts():
    # an interval far shorter than the mean gap sees no events at all
    res = axiom_independence_check(ProcessConfig(1e-9, 2.0, seed=0), [(0, 1), (1, 2)], 100)
    assert res.correlation is None
