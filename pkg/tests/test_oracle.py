import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from occr import oracle
from occr.errors import ScaleOrderViolated, ShapeTooSmall, ThresholdOutOfRange
from occr.harness import TABLE1_REFERENCE, TABLE1_ROWS, spacing_min_gaps
from occr.rng import substream


def test_pareto_moments():
    assert oracle.pareto_mean(3, 1) == 1.5
    assert oracle.pareto_second_moment(3, 1) == 3.0
    with pytest.raises(ShapeTooSmall):
        oracle.pareto_second_moment(2.0, 1)
    with pytest.raises(ShapeTooSmall):
        oracle.pareto_mean(1.0, 1)


def test_loan_moments():
    assert oracle.loan_moments(3, 1, 1, 1) == pytest.approx((0.75, 1.0))
    e_l, _ = oracle.loan_moments(4, 2, 0.6, 0.6)
    assert e_l == pytest.approx(0.6 * 4 * 2 / (2 * 3))
    e_l, _ = oracle.loan_moments(1e9, 1, 0.5, 0.9)
    assert e_l == pytest.approx((0.5 + 0.9) / 4)


def test_historical_var_oracle():
    assert oracle.historical_var_oracle(0.0, 100, 0.75, 1.0) == 0.0
    assert oracle.historical_var_oracle(1.0, 100, 0.75, 1.0) == 0.0
    v = oracle.historical_var_oracle(0.5, 100, 0.75, 1.0)
    assert v == pytest.approx(16 * 0.25 / 0.5625 / 900)
    assert round(v, 7) == 0.0079012
    assert oracle.historical_var_oracle(0.5, 200, 0.75, 1.0) == pytest.approx(v / 2, rel=1e-12)


def test_historical_bias_oracle():
    assert oracle.historical_bias_oracle(0.4, 10, 2.0, 4.0) == 0.4
    assert oracle.historical_bias_oracle(0.4, 10**12, 2.0, 9.0) == pytest.approx(0.4)
    mu_w, mu_w2 = oracle.weight_moments(1.0, 0.75, 1.0)
    assert (mu_w, mu_w2) == pytest.approx((0.1875, 1 / 9))
    assert oracle.historical_bias_oracle(0.5, 100, mu_w, mu_w2) == pytest.approx(0.51080, abs=5e-6)


def test_exceedance_oracle():
    assert oracle.lar_exceedance_oracle(2, 1, 2, 1) == 0.5
    assert oracle.lar_exceedance_oracle(2, 1, 3, 1) == pytest.approx(0.6)
    assert oracle.lar_exceedance_oracle(2, 1e-6, 3, 1) < 1e-11
    with pytest.raises(ScaleOrderViolated):
        oracle.lar_exceedance_oracle(2, 2, 3, 1)


@given(st.floats(0.1, 20), st.floats(0.1, 20), st.floats(1e-3, 1), st.floats(1, 100))
def test_exceedance_in_unit_interval(a_l, a_h, ratio, xm_h):
    p = oracle.lar_exceedance_oracle(a_l, ratio * xm_h, a_h, xm_h)
    assert 0.0 <= p <= 1.0


def test_newcredit_prob_oracle():
    assert oracle.newcredit_prob_oracle(1, 2, 2, 0.0, 5) == 0.0
    assert oracle.newcredit_prob_oracle(1, 2, 2, 0.5, 5) == 0.25
    assert oracle.newcredit_prob_oracle(1, 2, 2, 0.25, 2) == pytest.approx(0.1875)
    with pytest.raises(ThresholdOutOfRange):
        oracle.newcredit_prob_oracle(3, 2, 2, 0.25, 2)
    with pytest.raises(ThresholdOutOfRange):
        oracle.newcredit_prob_oracle(1, 2, 2, 0.6, 2)


def test_newcredit_spacing_factor_monte_carlo():
    # P(min adjacent spacing <= d) for n uniforms with 0/1 as outer neighbours.
    rng = substream(8)
    u = np.sort(rng.random((400000, 2)), axis=1)
    hit = spacing_min_gaps(u)[:, 0] <= 0.25
    se = math.sqrt(0.75 * 0.25 / hit.size)
    assert abs(hit.mean() - 0.75) < 5 * se


def test_transaction_oracle_table1():
    m = oracle.transaction_moments_oracle(0.60, 2.10, 300, 60000)
    assert m.mean == pytest.approx(0.10)
    assert round(m.variance, 6) == 0.000031
    m = oracle.transaction_moments_oracle(0.35, 2.25, 300, 60000)
    assert m.mean == pytest.approx(-0.15)
    assert m.variance == pytest.approx(1.44e-5, abs=5e-8)
    assert round(m.variance, 6) == 0.000014
    assert oracle.transaction_moments_oracle(0.5, 3, 1, 10).mean == 0.0
    for row, ref in zip(TABLE1_ROWS, TABLE1_REFERENCE):
        v = oracle.transaction_moments_oracle(row.p, row.alpha, row.x_min, row.n).variance
        assert abs(v - ref[1]) <= 1e-6


@given(st.floats(0, 1), st.floats(2.01, 10), st.integers(1, 10**6))
def test_transaction_oracle_odd_in_sign(p, alpha, n):
    a = oracle.transaction_moments_oracle(p, alpha, 1.0, n)
    b = oracle.transaction_moments_oracle(1 - p, alpha, 1.0, n)
    assert b.mean == pytest.approx(-a.mean, abs=1e-15)
    assert b.variance == pytest.approx(a.variance, rel=1e-12)


def test_utilization_oracle():
    m = oracle.utilization_moments_oracle(2.10, 300, 0.50, 0.90, 60000)
    assert round(m.mean, 6) == 0.333344
    e_y, e_y2 = oracle.collateral_cap_moments(2.10, 300, 0.50, 0.90)
    assert e_y2 / e_y**2 == pytest.approx(5.9187, abs=1e-4)
    assert oracle.utilization_moments_oracle(3, 1, 0.5, 0.9, 10**12).mean == pytest.approx(1 / 3)
    # Degenerate cap: Pareto shape -> infinity with a fixed LTV
    big = oracle.utilization_moments_oracle(1e9, 1, 0.7, 0.7, 50)
    assert big.mean == pytest.approx(1 / 3 + 1 / 450, rel=1e-6)


def test_bernoulli_oracles():
    assert oracle.current_moments_oracle(0.0, 10) == oracle.MomentPair(0.0, 0.0)
    assert oracle.current_moments_oracle(0.5, 2000) == oracle.MomentPair(0.5, 1.25e-4)
    assert oracle.newcredit_moments_oracle(1.0, 10) == oracle.MomentPair(1.0, 0.0)
    assert oracle.newcredit_moments_oracle(0.1875, 100).variance == pytest.approx(0.00152343, abs=1e-8)
    assert oracle.newcredit_moments_oracle(0.3, 10**15).variance < 1e-15


@given(st.just(0.0) | st.floats(1e-300, 1), st.integers(1, 10**6))
def test_bernoulli_scaling(s, k):
    for f in (oracle.current_moments_oracle, oracle.newcredit_moments_oracle):
        assert f(s, 2 * k).variance == f(s, k).variance / 2


@given(st.floats(2.05, 10), st.floats(0.1, 1e3), st.floats(0.1, 0.9), st.floats(0, 0.09), st.integers(2, 10**6))
def test_delta_oracles_scale_as_one_over_n(alpha, m, l_min, width, n):
    l_max = l_min + width
    u1 = oracle.utilization_moments_oracle(alpha, m, l_min, l_max, n)
    u2 = oracle.utilization_moments_oracle(alpha, m, l_min, l_max, 2 * n)
    assert u1.variance >= 0
    assert u2.variance == pytest.approx(u1.variance / 2, rel=1e-12)
    assert (u2.mean - 1 / 3) == pytest.approx((u1.mean - 1 / 3) / 2, rel=1e-9)
    e_l, e_l2 = oracle.loan_moments(alpha, m, l_min, l_max)
    h1 = oracle.historical_var_oracle(0.3, n, e_l, e_l2)
    assert oracle.historical_var_oracle(0.3, 2 * n, e_l, e_l2) == pytest.approx(h1 / 2, rel=1e-12)
    t1 = oracle.transaction_moments_oracle(0.7, alpha, m, n).variance
    assert oracle.transaction_moments_oracle(0.7, alpha, m, 2 * n).variance == pytest.approx(t1 / 2, rel=1e-12)
