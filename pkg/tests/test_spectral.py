import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratelab import _backend, spectral
from ratelab.errors import UsageError
from ratelab.optim import Kind
from ratelab.selftest import matched_multiset_error


def test_mu_pm_double_root():
    # 1/9 is not representable; the rounding splits the double root by ~sqrt(eps)
    plus, minus = spectral.mu_pm(1.0, 1 / 9, 0.5)
    assert plus == pytest.approx(1 / 3, abs=1e-8)
    assert minus == pytest.approx(1 / 3, abs=1e-8)
    assert plus * minus == pytest.approx(1 / 9, abs=1e-15)
    assert plus + minus == pytest.approx(2 / 3, abs=1e-15)
    plus, minus = spectral.mu_pm(4.0, 1 / 9, 0.5)
    assert plus == pytest.approx(-1 / 3, abs=1e-8)
    assert abs(minus) == pytest.approx(1 / 3, abs=1e-8)
    assert plus + minus == pytest.approx(-2 / 3, abs=1e-15)


def test_mu_pm_complex_pair_has_modulus_sqrt_alpha():
    plus, minus = spectral.mu_pm(2.0, 1 / 9, 0.5)
    assert plus.imag != 0
    assert plus == minus.conjugate()
    assert abs(plus) == pytest.approx(1 / 3, abs=1e-15)


@pytest.mark.parametrize("args", [(0.0, 0.5, 0.1), (1.0, 0.0, 0.1), (1.0, 1.0, 0.1), (1.0, 0.5, 0.0)])
def test_mu_pm_domain(args):
    with pytest.raises(UsageError):
        spectral.mu_pm(*args)


def test_block_matrix_examples():
    a = spectral.build_momentum_block_matrix([[1.0]], 0.0, [0.4])
    np.testing.assert_allclose(a, [[0.6, 0.0], [1.0, 0.0]], atol=1e-15)
    a = spectral.build_momentum_block_matrix([[1.0]], 1 / 9, [0.5])
    np.testing.assert_allclose(a, [[5 / 9, -1 / 18], [8 / 9, 1 / 9]], atol=1e-15)
    closed = spectral.mu_pm(1.0, 1 / 9, 0.5)
    # double root: the eigensolver resolves it only to ~sqrt(machine eps)
    assert matched_multiset_error(spectral.eigenvalues(a), closed) < 1e-7


def test_block_matrix_rejects_asymmetric_hessian():
    with pytest.raises(UsageError):
        spectral.build_momentum_block_matrix([[1.0, 0.5], [0.0, 1.0]], 0.5, 0.1)
    with pytest.raises(UsageError):
        spectral.build_momentum_block_matrix([[1.0, 0.5], [0.0, 1.0]], 0.5, 0.1, dps=30)


def test_block_matrix_gamma_length_mismatch():
    with pytest.raises(UsageError):
        spectral.build_momentum_block_matrix(np.eye(2), 0.5, [0.1, 0.2, 0.3])


def test_extended_precision_block_matches_double():
    h = spectral.random_spd_with_spectrum([1.0, 2.0, 4.0], 3)
    a = spectral.build_momentum_block_matrix(h, 0.3, [0.1, 0.2, 0.3])
    b = spectral.build_momentum_block_matrix(h, 0.3, [0.1, 0.2, 0.3], dps=30)
    np.testing.assert_allclose(np.array(b.tolist(), dtype=float), a, atol=1e-15)


def test_spectral_radius_examples():
    assert spectral.spectral_radius(np.diag([0.3, -0.9])) == 0.9
    assert spectral.spectral_radius(np.eye(3)) == 1.0
    a = spectral.build_momentum_block_matrix(np.diag([1.0, 4.0]), 1 / 9, 0.5)
    # the Jordan block at 1/3 costs about half the double-precision digits
    assert spectral.spectral_radius(a) == pytest.approx(1 / 3, abs=1e-7)
    with mpmath.workdps(40):
        alpha = mpmath.mpf(1) / 9
        gamma = mpmath.mpf(1) / 2
        a_mp = spectral.build_momentum_block_matrix(np.diag([1.0, 4.0]), alpha, gamma, dps=40)
    assert spectral.spectral_radius(a_mp) == pytest.approx(1 / 3, abs=1e-10)


def test_eigenvalues_input_checks():
    with pytest.raises(UsageError):
        spectral.eigenvalues(np.ones((2, 3)))
    with pytest.raises(UsageError):
        spectral.eigenvalues(np.eye(spectral.MAX_ORDER + 1))
    with pytest.raises(UsageError):
        spectral.eigenvalues([[np.nan]])


def test_stability_predicate():
    assert not spectral.momentum_stability_predicate(1.0, 4.0, 0.0, 0.5)  # boundary
    assert spectral.momentum_stability_predicate(1.0, 4.0, 1 / 9, 0.5)
    assert not spectral.momentum_stability_predicate(0.0, 4.0, 0.5, 0.01)
    with pytest.raises(UsageError):
        spectral.momentum_stability_predicate(5.0, 4.0, 0.5, 0.01)


def test_predicted_rate_examples():
    gd = spectral.predicted_rate("GD", 1.0, 4.0)
    assert (gd.gamma, gd.rate) == pytest.approx((0.4, 0.6), abs=1e-15)
    adam = spectral.predicted_rate("Adam", 1.0, 4.0, 0.1)
    assert adam.gamma == pytest.approx(0.05, abs=1e-16)
    assert adam.alpha == pytest.approx(1 / 9, abs=1e-15)
    assert adam.rate == pytest.approx(1 / 3, abs=1e-15)
    mom = spectral.predicted_rate(Kind.MOMENTUM, 1.0, 4.0, 0.1)  # epsilon ignored
    assert mom.gamma == pytest.approx(0.5, abs=1e-15)
    rms = spectral.predicted_rate("RMSprop", 1.0, 4.0, 0.1)
    assert rms.gamma == pytest.approx(0.04, abs=1e-16)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(1.01, 1e4))
def test_predicted_rate_closed_forms(kmin, cond):
    kmax = kmin * cond
    for kind in Kind:
        p = spectral.predicted_rate(kind, kmin, kmax, 0.1)
        if kind.uses_momentum:
            want = (math.sqrt(cond) - 1) / (math.sqrt(cond) + 1)
        else:
            want = (cond - 1) / (cond + 1)
        assert p.rate == pytest.approx(want, rel=1e-9, abs=1e-12)
        lin = spectral.linearized_rate(kind, [kmin, kmax], p.gamma, p.alpha or 0.0, 0.1)
        # the tuned momentum map has a double root at kmin, resolved to ~sqrt(eps)
        assert lin == pytest.approx(p.rate, abs=1e-6)


def test_spectral_report_invariants():
    rep = spectral.spectral_report(np.diag([1.0, 2.0, 4.0]), 1 / 9, 0.5)
    assert rep.stable
    assert rep.spectral_radius == pytest.approx(float(np.max(np.abs(rep.eigenvalues))))
    for _, mp, mm in rep.per_mode:
        assert max(abs(mp), abs(mm)) <= rep.spectral_radius + 1e-7
    gd = spectral.spectral_report(np.diag([1.0, 4.0]), 0.0, 0.4)
    assert gd.predicted_rate == pytest.approx(0.6, abs=1e-15)
    assert not spectral.spectral_report(np.diag([1.0, 4.0]), 0.0, 3.0).stable


# --- property: block spectrum against the closed form -----------------------

@st.composite
def block_cases(draw):
    d = draw(st.integers(1, 4))
    lam = draw(st.lists(st.floats(0.01, 10.0), min_size=d, max_size=d))
    alpha = draw(st.floats(0.01, 0.99))
    gmax = 2 * (1 + alpha) / ((1 - alpha) * max(lam))
    gamma = draw(st.floats(0.001, 0.999)) * gmax
    seed = draw(st.integers(0, 10_000))
    return np.array(lam), alpha, gamma, seed


@settings(max_examples=150, deadline=None)
@given(block_cases())
def test_block_spectrum_matches_mu_pm(case):
    lam, alpha, gamma, seed = case
    h = spectral.random_spd_with_spectrum(lam, seed)
    a = spectral.build_momentum_block_matrix(h, alpha, gamma)
    closed = [mu for l in lam for mu in spectral.mu_pm(l, alpha, gamma)]
    # rotated Hessian: diagonal only up to rounding, so near-double roots blur
    assert matched_multiset_error(spectral.eigenvalues(a), closed) <= 1e-6
    assert spectral.spectral_radius(a) < 1  # inside the stability region
    assert spectral.momentum_stability_predicate(lam.min(), lam.max(), alpha, gamma)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=4), st.floats(0.05, 1.0))
def test_heavy_ball_radius_is_sqrt_alpha(lam, scale):
    kmin, kmax = min(lam), max(lam)
    with mpmath.workdps(spectral.EXTENDED_DPS):
        k, big_k = mpmath.mpf(kmin), mpmath.mpf(kmax)
        gamma = mpmath.mpf(scale) / mpmath.sqrt(k * big_k)
        alpha = ((1 - gamma * k) / (1 + gamma * k)) ** 2
        a = spectral.build_momentum_block_matrix(np.diag(lam), alpha, gamma,
                                                 dps=spectral.EXTENDED_DPS)
        target = float(mpmath.sqrt(alpha))
    assert abs(spectral.spectral_radius(a) - target) <= 1e-10


@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.1, 10.0), st.floats(0.01, 20.0))
def test_stability_predicate_agrees_with_eigensolver(alpha, kmax, gamma):
    lam = [kmax / 3, kmax]
    a = spectral.build_momentum_block_matrix(np.diag(lam), alpha, gamma)
    sr = spectral.spectral_radius(a)
    if abs(gamma * kmax - 2 * (1 + alpha) / (1 - alpha)) < 1e-6:
        return  # too close to the boundary to compare
    assert spectral.momentum_stability_predicate(min(lam), kmax, alpha, gamma) == (sr < 1)


def test_random_spd_with_spectrum():
    np.testing.assert_array_equal(spectral.random_spd_with_spectrum([1.0], 9), [[1.0]])
    h = spectral.random_spd_with_spectrum([1.0, 4.0], 42)
    np.testing.assert_allclose(np.sort(spectral.eigenvalues(h).real), [1.0, 4.0], atol=1e-10)
    np.testing.assert_array_equal(h, h.T)


# --- Gelfand constant ---------------------------------------------------------

def test_gelfand_scalar_matrix():
    mats = [0.5 * np.eye(2)] * 6
    c = spectral.gelfand_product_check(mats, 0.5 * np.eye(2), 0.1)
    assert c == pytest.approx(math.sqrt(2) * 5 / 6, rel=1e-12)


def test_gelfand_single_matrix():
    a = np.array([[0.2, 0.3], [0.0, 0.4]])
    c = spectral.gelfand_product_check([a], a, 0.05)
    assert c == pytest.approx(np.linalg.norm(a) / (0.4 + 0.05), rel=1e-12)


def test_gelfand_order_mismatch():
    with pytest.raises(UsageError):
        spectral.gelfand_product_check([np.eye(2), np.eye(3)], np.eye(2), 0.1)
    with pytest.raises(UsageError):
        spectral.gelfand_product_check([np.eye(2)], np.eye(3), 0.1)


def test_gelfand_matches_brute_force():
    rng = np.random.default_rng(2)
    mats = [0.3 * rng.standard_normal((3, 3)) for _ in range(12)]
    limit = mats[-1]
    r = spectral.spectral_radius(limit) + 0.1
    best = 0.0
    for n in range(len(mats)):
        prod = np.eye(3)
        for m in range(n, len(mats)):
            prod = mats[m] @ prod
            best = max(best, np.linalg.norm(prod) / r ** (m - n + 1))
    assert spectral.gelfand_product_check(mats, limit, 0.1) == pytest.approx(best, rel=1e-10)


@pytest.mark.parametrize("name", sorted(_backend.backends()))
def test_gelfand_backends_agree(name):
    impl = _backend.backends()[name]
    lam = np.diag([1.0, 4.0])
    mats = [spectral.build_momentum_block_matrix(lam, 1 / 9, 0.5 * (1 - 0.5 * 0.9 ** n))
            for n in range(1, 65)]
    limit = spectral.build_momentum_block_matrix(lam, 1 / 9, 0.5)
    ref = spectral.gelfand_profile(mats, limit, 0.05)
    np.testing.assert_allclose(spectral.gelfand_profile(mats, limit, 0.05, impl), ref, rtol=1e-12)
