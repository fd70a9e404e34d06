import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratelab import objectives, optim, ratefit
from ratelab.errors import InsufficientDataError, UsageError
from ratelab.ratefit import Verdict


def test_exact_geometric_sequence():
    d = 5 * 0.6 ** np.arange(61)
    est = ratefit.estimate_rate(d, 0.2, 1e-12)
    assert est.rho_hat == pytest.approx(0.6, abs=1e-12)
    assert est.residual < 1e-12
    # 5 * 0.6**58 < 1e-12, so the floor ends the window there
    assert est.window == (11, 58)
    assert est.n_points == 47


def test_oscillating_prefactor():
    n = np.arange(61)
    est = ratefit.estimate_rate(0.6 ** n * (2 + (-1.0) ** n), 0.2, 1e-12)
    assert est.rho_hat == pytest.approx(0.6, abs=0.01)


def test_constant_sequence():
    assert ratefit.estimate_rate(np.ones(40)).rho_hat == pytest.approx(1.0, abs=1e-12)


def test_floor_cut_drops_tail_including_zeros():
    d = np.concatenate([0.5 ** np.arange(30), [0.0, 1.0]])
    est = ratefit.estimate_rate(d, 0.0, 1e-12)
    assert est.window == (0, 30)
    assert est.rho_hat == pytest.approx(0.5, abs=1e-12)


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        ratefit.estimate_rate(0.5 ** np.arange(15), 0.5, 1e-12)
    with pytest.raises(InsufficientDataError):
        ratefit.estimate_rate([1.0, 0.0] + [1.0] * 20)


@pytest.mark.parametrize("kw", [dict(burn_in_fraction=1.0), dict(burn_in_fraction=-0.1),
                                dict(floor=0.0)])
def test_estimate_rate_argument_checks(kw):
    with pytest.raises(UsageError):
        ratefit.estimate_rate(np.ones(40), **kw)


def test_sup_ratio_examples():
    d = 0.5 ** np.arange(50)
    assert ratefit.sup_ratio_statistic(d, 0.6) == pytest.approx(1.0)
    grow = 0.7 ** np.arange(50)
    short = ratefit.sup_ratio_statistic(grow[:25], 0.6)
    full = ratefit.sup_ratio_statistic(grow, 0.6)
    assert full == pytest.approx((0.7 / 0.6) ** 49, rel=1e-10)
    assert full > 10 * short


def test_sup_ratio_log_space_and_zeros():
    d = np.concatenate([np.ones(3), np.zeros(2)])
    assert ratefit.sup_ratio_statistic(d, 0.5) == pytest.approx(4.0)
    huge = np.full(2000, 1.0)
    assert ratefit.sup_ratio_statistic(huge, 0.5) == math.inf
    assert ratefit.sup_ratio_statistic(huge, 0.5, log=True) == pytest.approx(1999 * math.log(2))
    with pytest.raises(UsageError):
        ratefit.sup_ratio_statistic(d, 1.0)


def test_sup_ratio_stable_on_gd_trajectory():
    traj = optim.run(objectives.make_quadratic([1.0, 4.0]), [1.0, 1.0],
                     optim.OptimizerConfig("GD", 0.4), 300, 1e-150)
    d = traj.distances
    half = ratefit.sup_ratio_statistic(d[: len(d) // 2], 0.62)
    assert ratefit.sup_ratio_statistic(d, 0.62) < 10 * half


def test_adjudicate():
    assert ratefit.adjudicate(0.601, 0.6, 0.02) is Verdict.MATCH
    assert ratefit.adjudicate(0.33, 0.6, 0.02) is Verdict.FASTER
    assert ratefit.adjudicate(0.95, 1 / 3, 0.02) is Verdict.SLOWER
    est = ratefit.RateEstimate(0.61, 0.0, (0, 10), 10)
    assert ratefit.adjudicate(est, 0.6) is Verdict.MATCH
    with pytest.raises(UsageError):
        ratefit.adjudicate(0.5, 0.5, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 0.99), st.floats(1e-6, 1e6))
def test_geometric_recovery(rho, prefactor):
    d = prefactor * rho ** np.arange(100, dtype=float)
    assert ratefit.estimate_rate(d, 0.5, 1e-300).rho_hat == pytest.approx(rho, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_prefactor_only_shifts_intercept(seed, c):
    rng = np.random.default_rng(seed)
    d = np.exp(np.cumsum(rng.uniform(-1.0, 0.2, 80)))
    a = ratefit.estimate_rate(d, 0.3, 1e-300).rho_hat
    b = ratefit.estimate_rate(c * d, 0.3, 1e-300).rho_hat
    assert b == pytest.approx(a, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_sup_ratio_monotone_in_rho(seed, rho, step):
    d = np.abs(np.random.default_rng(seed).standard_normal(60)) * 0.8 ** np.arange(60)
    lo = ratefit.sup_ratio_statistic(d, rho, log=True)
    hi = ratefit.sup_ratio_statistic(d, rho + step, log=True)
    assert hi <= lo
