import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from rffso.analysis import HarqParams, decoding_prob_exact, fso_log_moments
from rffso.channel import FsoLinkParams, RfLinkParams, sample_fso_gain
from rffso.mc import (
    BLOCK_TRIALS,
    McConfig,
    accumulated_information,
    block_stream,
    simulate_fso_rate_stats,
    simulate_harq,
)
from conftest import ALPHA, BETA, NU, OMEGA, fig3_point


def test_zero_power_always_fails():
    fso = FsoLinkParams(ALPHA, BETA, 0.9, 1, 1.0, 0.0)
    rf = RfLinkParams(NU, OMEGA, p_cons=0.0)
    est = simulate_harq(fso, rf, HarqParams(3, 1.0, 10, 0.03), McConfig(5000, 1))
    assert est.phi_hat == (1.0, 1.0, 1.0)
    assert est.throughput_hat == 0.0


def test_vanishing_rate_never_fails():
    fso, rf, _ = fig3_point(20)
    est = simulate_harq(fso, rf, HarqParams(3, 1e-12, 100, 0.03), McConfig(20000, 3))
    assert est.phi_hat == (0.0, 0.0, 0.0)


def test_open_loop_outage_matches_exact():
    fso, rf, _ = fig3_point(20)
    harq = HarqParams(1, 1.0, 100, 0.03)
    est = simulate_harq(fso, rf, harq, McConfig(10 ** 6, 99))
    phi = decoding_prob_exact(1, harq, fso_log_moments(fso, harq.psi), rf)
    assert abs(est.outage_hat - phi) <= max(3 * est.std_err[0], 5e-3)


def test_standard_errors_are_binomial():
    fso, rf, harq = fig3_point(10)
    est = simulate_harq(fso, rf, harq, McConfig(30000, 5))
    for p, se in zip(est.phi_hat, est.std_err):
        assert se == pytest.approx(math.sqrt(p * (1 - p) / 30000))
    assert all(b <= a for a, b in zip(est.phi_hat, est.phi_hat[1:]))


def test_reproducible_across_worker_counts():
    fso, rf, harq = fig3_point(5)
    cfg = McConfig(3 * BLOCK_TRIALS + 123, seed=2 ** 63 + 17)
    one = simulate_harq(fso, rf, harq, cfg, workers=1)
    again = simulate_harq(fso, rf, harq, cfg, workers=1)
    two = simulate_harq(fso, rf, harq, cfg, workers=2)
    assert one == again == two


def test_different_seeds_differ():
    fso, rf, harq = fig3_point(5)
    a = simulate_harq(fso, rf, harq, McConfig(20000, 1))
    b = simulate_harq(fso, rf, harq, McConfig(20000, 2))
    assert a.failures != b.failures


def test_block_streams_are_distinct():
    x = block_stream(7, 0).random(4)
    y = block_stream(7, 1).random(4)
    assert not np.array_equal(x, y)
    assert np.array_equal(x, block_stream(7, 0).random(4))


def test_antithetic_estimate_consistent():
    fso, rf, harq = fig3_point(10)
    plain = simulate_harq(fso, rf, harq, McConfig(60000, 8))
    anti = simulate_harq(fso, rf, harq, McConfig(60000, 8, antithetic=True))
    for p, q, se in zip(plain.phi_hat, anti.phi_hat, plain.std_err):
        assert abs(p - q) < 5 * se * math.sqrt(2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_accumulated_information_nondecreasing(m_max, n_fso, seed):
    rng = np.random.default_rng(seed)
    harq = HarqParams(m_max, 1.0, n_fso, 0.7)
    rf_rate = rng.exponential(size=8)
    logs = rng.exponential(size=(8, m_max * n_fso))
    acc = accumulated_information(rf_rate, logs, harq)
    assert np.all(np.diff(acc, axis=1) >= 0)
    # round-m value is m * W_m
    m = m_max
    w = rf_rate + harq.psi / (m * n_fso) * logs[:, : m * n_fso].sum(axis=1)
    np.testing.assert_allclose(acc[:, -1], m * w, rtol=1e-12)


def test_rate_stats_zero_power():
    fso = FsoLinkParams(ALPHA, BETA, 0.9, 1, 1.0, 0.0)
    st_ = simulate_fso_rate_stats(fso, 0.03, 10 ** 4, 1)
    assert (st_.mean, st_.variance) == (0.0, 0.0)


def test_rate_stats_match_quadrature():
    fso, _, harq = fig3_point(20)
    est = simulate_fso_rate_stats(fso, harq.psi, 10 ** 6, 5)
    assert abs(est.mean - fso_log_moments(fso, harq.psi).mu) < 3 * est.mean_se


def test_rate_stats_psi_doubling_exact():
    fso, _, _ = fig3_point(20)
    a = simulate_fso_rate_stats(fso, 0.03, 10 ** 4, 9)
    b = simulate_fso_rate_stats(fso, 0.06, 10 ** 4, 9)
    assert b.mean == 2 * a.mean


def test_rate_stats_minimum_samples():
    fso, _, _ = fig3_point(20)
    with pytest.raises(ValueError):
        simulate_fso_rate_stats(fso, 0.03, 10, 1)


def test_fso_round_average_is_gaussian():
    fso, _, harq = fig3_point(20)
    g = sample_fso_gain(fso, block_stream(1, 0), (2000, harq.n_fso))
    y = harq.psi * np.log1p(fso.c_r * fso.p_fso * g).mean(axis=1)
    res = stats.anderson(y, "norm")
    one_percent = list(res.significance_level).index(1.0)
    assert res.statistic < res.critical_values[one_percent]


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(0)
    with pytest.raises(ValueError):
        McConfig(10, seed=-1)
