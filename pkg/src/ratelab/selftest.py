"""Quick invariant suites behind ``ratelab selftest``."""

from __future__ import annotations

import math

import mpmath
import numpy as np

from . import _backend, spectral
from .harness import validate_adam_global_config
from .objectives import check_coercivity, check_gradient_fd, make_quadratic, make_quartic_perturbed, sample_ball
from .optim import Kind, OptimizerConfig, direction_form_equivalence


def random_config(rng: np.random.Generator, kind: Kind) -> OptimizerConfig:
    return OptimizerConfig(
        kind=kind,
        gamma=float(rng.uniform(0.01, 1.0)),
        alpha=float(rng.uniform(0.01, 0.99)) if kind.uses_momentum else 0.0,
        beta=float(rng.uniform(0.01, 0.999)) if kind.adaptive else 0.0,
        epsilon=float(10 ** rng.uniform(-3, 0)),
    )


def form_equivalence(samples: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    kinds = list(Kind)
    bad = 0
    for i in range(samples):
        kind = kinds[i % len(kinds)]
        n, d = int(rng.integers(1, 51)), int(rng.integers(1, 6))
        history = rng.standard_normal((n, d))
        if not direction_form_equivalence(history, random_config(rng, kind)):
            bad += 1
    return bad == 0, f"{samples - bad}/{samples} histories agree to 1e-12"


def random_block_case(rng: np.random.Generator):
    d = int(rng.integers(1, 5))
    lam = rng.uniform(0.0, 10.0, d)
    lam[lam == 0] = 1.0
    alpha = float(rng.uniform(0.01, 0.99))
    gmax = 2 * (1 + alpha) / ((1 - alpha) * lam.max())
    gamma = float(rng.uniform(0, 1) * gmax) or gmax / 2
    return lam, alpha, gamma


def matched_multiset_error(numeric, closed) -> float:
    """Greedy nearest matching; returns the worst pairing distance."""
    rest = list(closed)
    worst = 0.0
    for z in sorted(numeric, key=lambda z: (z.real, z.imag)):
        j = min(range(len(rest)), key=lambda k: abs(rest[k] - z))
        worst = max(worst, abs(rest[j] - z))
        rest.pop(j)
    return worst


def spectrum_agreement(samples: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        lam, alpha, gamma = random_block_case(rng)
        a = spectral.build_momentum_block_matrix(np.diag(lam), alpha, gamma)
        closed = [mu for l in lam for mu in spectral.mu_pm(l, alpha, gamma)]
        worst = max(worst, matched_multiset_error(spectral.eigenvalues(a), closed))
    return worst <= 1e-8, f"worst eigenvalue mismatch {worst:.2e} (tol 1e-8)"


def heavy_ball_radius(samples: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        d = int(rng.integers(1, 5))
        lam = rng.uniform(0.1, 10.0, d)
        kmin, kmax = lam.min(), lam.max()
        with mpmath.workdps(spectral.EXTENDED_DPS):
            k, big_k = mpmath.mpf(kmin), mpmath.mpf(kmax)
            gamma = mpmath.mpf(float(rng.uniform(0.05, 1.0))) / mpmath.sqrt(k * big_k)
            alpha = ((1 - gamma * k) / (1 + gamma * k)) ** 2
            a = spectral.build_momentum_block_matrix(np.diag(lam), alpha, gamma,
                                                     dps=spectral.EXTENDED_DPS)
            sr = spectral.spectral_radius(a)
            worst = max(worst, abs(sr - float(mpmath.sqrt(alpha))))
    return worst <= 1e-10, f"worst |sr - sqrt(alpha)| {worst:.2e} (tol 1e-10)"


def objective_checks(seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst_fd, worst_coerce = 0.0, math.inf
    for obj in (make_quadratic([1.0, 4.0]), make_quartic_perturbed([1.0, 4.0], None, 0.1)):
        for x in sample_ball(rng, obj.minimizer, 1.0, 100):
            worst_fd = max(worst_fd, check_gradient_fd(obj, x, 1e-5))
        worst_coerce = min(worst_coerce, check_coercivity(obj, 200, 1.0, seed) - obj.kappa_min)
    ok = worst_fd < 1e-6 and worst_coerce >= -1e-10
    return ok, f"fd residual {worst_fd:.2e}, coercivity margin {worst_coerce:.2e}"


def validator_boundaries() -> tuple[bool, str]:
    cases = [
        ((4.0, 0.9, 0.999, 0.02, 0.1), True),
        ((4.0, 0.9, 0.8, 0.02, 0.1), False),
        ((4.0, 0.9, 0.9 * 0.9, 0.02, 0.1), False),
        ((4.0, 0.9, 0.999, 0.9 * 0.1 / 4.0, 0.1), False),
    ]
    bad = [args for args, want in cases if bool(validate_adam_global_config(*args)) != want]
    return not bad, f"{len(cases) - len(bad)}/{len(cases)} boundary cases"


def gelfand(seed: int = 0) -> tuple[bool, str]:
    lam = np.array([1.0, 4.0])
    alpha, gamma = 1 / 9, 0.5
    limit = spectral.build_momentum_block_matrix(np.diag(lam), alpha, gamma)
    mats = [spectral.build_momentum_block_matrix(np.diag(lam), alpha,
                                                 gamma * (1 - 0.5 * 0.9 ** n))
            for n in range(1, 129)]
    prof = spectral.gelfand_profile(mats, limit, 0.05)
    growth = prof[127] / prof[63]
    return bool(np.isfinite(growth) and growth < 1.01), f"C(128)/C(64) = {growth:.6f}"


SUITES = (
    ("form equivalence", form_equivalence),
    ("block spectrum vs closed form", spectrum_agreement),
    ("heavy-ball spectral radius", heavy_ball_radius),
    ("objective gradients and coercivity", objective_checks),
    ("Adam global-config boundaries", validator_boundaries),
    ("Gelfand product constant", gelfand),
)


def run_all(out) -> bool:
    out.write(f"backend: {_backend.NAME}\n")
    all_ok = True
    for name, fn in SUITES:
        ok, detail = fn()
        all_ok &= ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
    return all_ok
