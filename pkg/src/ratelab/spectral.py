"""Linearised iteration matrices, their spectra, and predicted local rates.

Near the minimizer, momentum (and Adam once its effective step has settled
at ``gamma / epsilon``) evolves the stacked state ``(theta, m)`` by

    A = [[I - (1 - alpha) diag(G) H,  -alpha diag(G)],
         [(1 - alpha) H,               alpha I       ]]

while GD and RMSprop reduce to ``I - diag(G) H``.  The dense eigensolver is
LAPACK's (via ``numpy.linalg.eigvals``); :func:`mu_pm` is the independent
closed form it is checked against.

Defective spectra (the heavy-ball tuning puts a double root at the smallest
curvature) are only resolved to about the square root of the working
precision.  Passing ``dps`` builds the matrix in mpmath and the eigenvalues
then come from mpmath's QR iteration at that many digits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _backend
from .errors import EigenSolverError, UsageError
from .optim import Kind

MAX_ORDER = 64
SYMMETRY_TOL = 1e-12
EXTENDED_DPS = 40


def mu_pm(lambda_i: float, alpha: float, gamma: float) -> tuple[complex, complex]:
    """Both roots of ``t**2 - (1 + alpha - (1 - alpha) gamma lambda_i) t + alpha``.

    Returns ``(mu_plus, mu_minus)``.  A negative discriminant gives a
    conjugate pair of modulus ``sqrt(alpha)``.
    """
    if not lambda_i > 0:
        raise UsageError(f"lambda_i must be > 0, got {lambda_i}")
    if not 0 < alpha < 1:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}")
    if not gamma > 0:
        raise UsageError(f"gamma must be > 0, got {gamma}")
    mid = (1.0 + alpha - gamma * lambda_i * (1.0 - alpha)) / 2.0
    disc = mid * mid - alpha
    root = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    return complex(mid + root), complex(mid - root)


def _square(matrix, name="matrix") -> np.ndarray:
    a = np.array(matrix, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise UsageError(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    return a


def _symmetric(hessian) -> np.ndarray:
    h = _square(hessian, "hessian")
    asym = float(np.max(np.abs(h - h.T)))
    if asym > SYMMETRY_TOL:
        raise UsageError(f"hessian is not symmetric (max |H - H^T| = {asym:.3e})")
    return h


def _gamma_vector(gamma, d) -> np.ndarray:
    g = np.array(gamma, dtype=np.float64).reshape(-1)
    if g.size == 1:
        g = np.full(d, g[0])
    if g.size != d:
        raise UsageError(f"gamma vector has length {g.size}, hessian order is {d}")
    return g


def _block_mp(hessian, alpha, gamma_vector, dps):
    with mpmath.workdps(dps):
        h = mpmath.matrix(hessian) if not isinstance(hessian, mpmath.matrix) else hessian.copy()
        if h.rows != h.cols:
            raise UsageError(f"hessian must be square, got {h.rows}x{h.cols}")
        d = h.rows
        if max((abs(h[i, j] - h[j, i]) for i in range(d) for j in range(d)), default=0) > SYMMETRY_TOL:
            raise UsageError("hessian is not symmetric")
        gam = list(gamma_vector) if np.ndim(gamma_vector) else [gamma_vector] * d
        if len(gam) != d:
            raise UsageError(f"gamma vector has length {len(gam)}, hessian order is {d}")
        gam = [mpmath.mpf(g) for g in gam]
        a = mpmath.mpf(alpha)
        out = mpmath.zeros(2 * d, 2 * d)
        for i in range(d):
            for j in range(d):
                out[i, j] = (1 if i == j else 0) - (1 - a) * gam[i] * h[i, j]
                out[d + i, j] = (1 - a) * h[i, j]
            out[i, d + i] = -a * gam[i]
            out[d + i, d + i] = a
        return out


def build_momentum_block_matrix(hessian, alpha: float, gamma_vector, dps=None):
    """The 2d x 2d linearised momentum/Adam map acting on ``(theta, m)``.

    With ``dps`` the result is an mpmath matrix at that precision; ``alpha``
    and ``gamma_vector`` may then be mpmath numbers.
    """
    if dps is not None:
        return _block_mp(hessian, alpha, gamma_vector, dps)
    h = _symmetric(hessian)
    d = h.shape[0]
    gam = np.diag(_gamma_vector(gamma_vector, d))
    eye = np.eye(d)
    return np.block([
        [eye - (1.0 - alpha) * gam @ h, -alpha * gam],
        [(1.0 - alpha) * h, alpha * eye],
    ])


def first_order_matrix(hessian, gamma_vector) -> np.ndarray:
    """``I - diag(G) H``: the linearised GD/RMSprop map."""
    h = _symmetric(hessian)
    d = h.shape[0]
    return np.eye(d) - np.diag(_gamma_vector(gamma_vector, d)) @ h


def _eig_mp(matrix, dps):
    if matrix.rows != matrix.cols:
        raise UsageError(f"matrix must be square, got {matrix.rows}x{matrix.cols}")
    if matrix.rows > MAX_ORDER:
        raise UsageError(f"order {matrix.rows} exceeds the dense limit {MAX_ORDER}")
    with mpmath.workdps(dps):
        try:
            return list(mpmath.eig(matrix, left=False, right=False))
        except (ZeroDivisionError, ValueError, RuntimeError) as exc:
            raise EigenSolverError(f"mpmath eig failed at {dps} digits: {exc}") from exc


def eigenvalues(matrix, dps=None) -> np.ndarray:
    """Eigenvalues from a general dense solver (LAPACK, or mpmath for mpmath input)."""
    if isinstance(matrix, mpmath.matrix):
        return np.array([complex(z) for z in _eig_mp(matrix, dps or EXTENDED_DPS)])
    a = _square(matrix)
    if a.shape[0] > MAX_ORDER:
        raise UsageError(f"order {a.shape[0]} exceeds the dense limit {MAX_ORDER}")
    if not np.all(np.isfinite(a)):
        raise UsageError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigenvalue iteration did not converge for order {a.shape[0]} matrix "
            f"(max |entry| = {np.max(np.abs(a)):.3e}): {exc}") from exc


def spectral_radius(matrix, dps=None) -> float:
    """Largest eigenvalue modulus."""
    if isinstance(matrix, mpmath.matrix):
        dps = dps or EXTENDED_DPS
        eig = _eig_mp(matrix, dps)
        with mpmath.workdps(dps):
            return float(max(abs(z) for z in eig))
    return float(np.max(np.abs(eigenvalues(matrix))))


def momentum_stability_predicate(kappa_min: float, kappa_max: float,
                                 alpha: float, gamma: float) -> bool:
    """``sr(A) < 1`` criterion: ``kappa_min > 0`` and
    ``gamma * kappa_max < 2 (1 + alpha) / (1 - alpha)``, both strict."""
    if kappa_min > kappa_max:
        raise UsageError(f"kappa_min {kappa_min} exceeds kappa_max {kappa_max}")
    return kappa_min > 0 and gamma * kappa_max < 2.0 * (1.0 + alpha) / (1.0 - alpha)


@dataclass(frozen=True)
class RatePrediction:
    gamma: float
    alpha: float | None
    rate: float


def predicted_rate(kind, kappa_min: float, kappa_max: float,
                   epsilon: float = 1.0) -> RatePrediction:
    """Tuned step size, momentum and local rate for each optimizer family.

    GD/RMSprop: ``gamma = 2 eps / (kappa_min + kappa_max)`` with rate
    ``(cond - 1) / (cond + 1)``.  Momentum/Adam: ``gamma = eps / sqrt(kappa_min kappa_max)``
    and ``alpha = ((1 - gamma kappa_min / eps) / (1 + gamma kappa_min / eps))**2``
    with rate ``sqrt(alpha) = (sqrt(cond) - 1) / (sqrt(cond) + 1)``.
    ``epsilon`` is forced to 1 for GD and momentum.
    """
    kind = Kind.parse(kind)
    if not 0 < kappa_min < kappa_max:
        raise UsageError(f"need 0 < kappa_min < kappa_max, got {kappa_min}, {kappa_max}")
    if not epsilon > 0:
        raise UsageError(f"epsilon must be > 0, got {epsilon}")
    eps = epsilon if kind.adaptive else 1.0
    if kind in (Kind.GD, Kind.RMSPROP):
        return RatePrediction(
            gamma=2.0 * eps / (kappa_min + kappa_max), alpha=None,
            rate=(kappa_max - kappa_min) / (kappa_max + kappa_min))
    gamma = eps / math.sqrt(kappa_min * kappa_max)
    q = gamma / eps * kappa_min
    alpha = ((1.0 - q) / (1.0 + q)) ** 2
    return RatePrediction(gamma=gamma, alpha=alpha, rate=math.sqrt(alpha))


def linearized_rate(kind, spectrum, gamma: float, alpha: float = 0.0,
                    epsilon: float = 1.0) -> float:
    """Spectral radius of the linearisation at the minimizer for arbitrary
    hyperparameters, with the adaptive step frozen at ``gamma / epsilon``."""
    kind = Kind.parse(kind)
    lam = np.asarray(spectrum, dtype=np.float64).reshape(-1)
    step = gamma / epsilon if kind.adaptive else gamma
    if kind.uses_momentum:
        return max(max(abs(mu) for mu in mu_pm(l, alpha, step)) for l in lam)
    return float(np.max(np.abs(1.0 - step * lam)))


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Spectrum of a linearised map plus the closed-form per-mode roots.

    ``per_mode`` rows are ``(lambda_i, mu_plus, mu_minus)``.  Without momentum
    the pair is the ``alpha -> 0`` limit ``(1 - gamma lambda_i, 0)``.
    ``predicted_rate`` is ``None`` when the map is not contracting.
    """

    eigenvalues: np.ndarray
    spectral_radius: float
    predicted_rate: float | None
    per_mode: tuple

    @property
    def stable(self) -> bool:
        return self.predicted_rate is not None


def spectral_report(hessian, alpha: float, gamma: float) -> SpectralReport:
    """Spectral summary of the block map (``alpha > 0``) or ``I - gamma H``."""
    h = _symmetric(hessian)
    lam = np.linalg.eigvalsh(h)
    if alpha > 0:
        matrix = build_momentum_block_matrix(h, alpha, gamma)
        per_mode = tuple((float(l), *mu_pm(float(l), alpha, gamma)) for l in lam)
    else:
        matrix = first_order_matrix(h, gamma)
        per_mode = tuple((float(l), complex(1.0 - gamma * l), 0j) for l in lam)
    eig = eigenvalues(matrix)
    sr = float(np.max(np.abs(eig)))
    return SpectralReport(eigenvalues=eig, spectral_radius=sr,
                          predicted_rate=sr if sr < 1 else None, per_mode=per_mode)


def _stack(matrices) -> np.ndarray:
    mats = [_square(m) for m in matrices]
    if not mats:
        raise UsageError("need at least one matrix")
    order = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != order:
            raise UsageError(f"matrix {i} has order {m.shape[0]}, expected {order}")
    return np.ascontiguousarray(np.stack(mats))


def gelfand_profile(matrices, limit, delta: float, backend=None) -> np.ndarray:
    """Running empirical constant: entry ``L - 1`` is the Gelfand constant over
    all products of the first ``L`` matrices."""
    mats = _stack(matrices)
    lim = _square(limit, "limit")
    if lim.shape[0] != mats.shape[1]:
        raise UsageError(f"limit has order {lim.shape[0]}, products have {mats.shape[1]}")
    if not delta > 0:
        raise UsageError(f"delta must be > 0, got {delta}")
    log_r = math.log(spectral_radius(lim) + delta)
    impl = backend if backend is not None else _backend
    best = np.maximum.accumulate(impl.gelfand_scan(mats, log_r))
    with np.errstate(over="ignore"):
        return np.exp(best)


def gelfand_product_check(matrices, limit, delta: float, backend=None) -> float:
    """Empirical constant ``max_{n<m} ||A_m ... A_{n+1}||_F / (sr(limit) + delta)**(m - n)``.

    Products are renormalised as they grow so long products neither
    underflow nor overflow.
    """
    return float(gelfand_profile(matrices, limit, delta, backend)[-1])


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Product of ``d`` random Householder reflections."""
    q = np.eye(d)
    for _ in range(d):
        v = rng.standard_normal(d)
        nv = float(np.dot(v, v))
        if nv == 0.0:
            continue
        q = q - 2.0 * np.outer(q @ v, v) / nv
    return q


def random_spd_with_spectrum(spectrum, seed: int) -> np.ndarray:
    """``Q diag(spectrum) Q^T`` for a seeded random orthogonal ``Q`` (PCG64)."""
    lam = np.array(spectrum, dtype=np.float64).reshape(-1)
    if lam.size == 0:
        raise UsageError("spectrum must be nonempty")
    q = random_orthogonal(lam.size, np.random.default_rng(seed))
    h = (q * lam) @ q.T
    return 0.5 * (h + h.T)
