"""Test objectives with a known minimizer and Hessian spectrum at it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UsageError


@dataclass(frozen=True, eq=False)
class Objective:
    """Gradient oracle plus the curvature facts the rate theory needs.

    ``separable`` holds ``(spectrum, c)`` when the gradient is
    ``spectrum * r + 4 c r**3`` with ``r = theta - minimizer``; trajectories
    on such objectives run in the compiled kernel.
    """

    dimension: int
    minimizer: np.ndarray
    gradient: Callable[[np.ndarray], np.ndarray]
    value: Callable[[np.ndarray], float]
    kappa_min: float
    kappa_max: float
    lipschitz_bound: float | None = None
    separable: tuple | None = None
    family: str = "custom"

    @property
    def cond(self) -> float:
        return self.kappa_max / self.kappa_min


def _validate(spectrum, minimizer):
    lam = np.array(spectrum, dtype=np.float64).reshape(-1)
    if lam.size == 0:
        raise UsageError("spectrum must be nonempty")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise UsageError(f"spectrum entries must be positive and finite, got {lam.tolist()}")
    if minimizer is None:
        center = np.zeros_like(lam)
    else:
        center = np.array(minimizer, dtype=np.float64).reshape(-1)
    if center.shape != lam.shape:
        raise UsageError(f"minimizer has length {center.size}, spectrum has {lam.size}")
    lam.setflags(write=False)
    center.setflags(write=False)
    return lam, center


def make_quadratic(spectrum, minimizer=None) -> Objective:
    """``L(theta) = 1/2 sum_k lam_k (theta_k - center_k)**2``."""
    lam, center = _validate(spectrum, minimizer)

    def gradient(theta):
        return lam * (np.asarray(theta, dtype=np.float64) - center)

    def value(theta):
        r = np.asarray(theta, dtype=np.float64) - center
        return 0.5 * float(np.dot(lam * r, r))

    return Objective(
        dimension=lam.size, minimizer=center, gradient=gradient, value=value,
        kappa_min=float(lam.min()), kappa_max=float(lam.max()),
        lipschitz_bound=float(lam.max()), separable=(lam, 0.0), family="quadratic",
    )


def make_quartic_perturbed(spectrum, minimizer=None, c: float = 0.0) -> Objective:
    """Quadratic plus ``c * sum_k (theta_k - center_k)**4``.

    The quartic term has zero Hessian at the minimizer, so the curvature
    bounds there are those of the quadratic.  The gradient is not globally
    Lipschitz for ``c > 0``.
    """
    lam, center = _validate(spectrum, minimizer)
    c = float(c)
    if not c >= 0:
        raise UsageError(f"quartic coefficient must be >= 0, got {c}")

    def gradient(theta):
        r = np.asarray(theta, dtype=np.float64) - center
        return lam * r + 4.0 * c * (r * r * r)

    def value(theta):
        r = np.asarray(theta, dtype=np.float64) - center
        r2 = r * r
        return 0.5 * float(np.dot(lam * r, r)) + c * float(np.dot(r2, r2))

    return Objective(
        dimension=lam.size, minimizer=center, gradient=gradient, value=value,
        kappa_min=float(lam.min()), kappa_max=float(lam.max()),
        lipschitz_bound=float(lam.max()) if c == 0 else None,
        separable=(lam, c), family="quartic",
    )


def sample_ball(rng: np.random.Generator, center, radius: float, size: int) -> np.ndarray:
    """``size`` points uniform in the closed ball, one per row."""
    center = np.asarray(center, dtype=np.float64).reshape(-1)
    d = center.size
    directions = rng.standard_normal((size, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.random((size, 1)) ** (1.0 / d)
    return center + radii * directions / norms


def check_gradient_fd(obj: Objective, point, h: float = 1e-5) -> float:
    """Largest entrywise gap between central differences of ``value`` and ``gradient``."""
    if h <= 0:
        raise UsageError(f"h must be > 0, got {h}")
    x = np.asarray(point, dtype=np.float64).reshape(-1)
    fd = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd[i] = (obj.value(x + e) - obj.value(x - e)) / (2.0 * h)
    return float(np.max(np.abs(fd - obj.gradient(x))))


def check_coercivity(obj: Objective, samples: int, radius: float, seed: int) -> float:
    """Smallest ``<theta - center, grad(theta)> / |theta - center|**2`` over
    ``samples`` seeded uniform points in the ball of ``radius``.

    Compare the result against ``obj.kappa_min``.
    """
    if radius <= 0:
        raise UsageError(f"radius must be > 0, got {radius}")
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    points = sample_ball(rng, obj.minimizer, radius, samples)
    best = np.inf
    for theta in points:
        r = theta - obj.minimizer
        rr = float(np.dot(r, r))
        if rr == 0.0:
            continue
        best = min(best, float(np.dot(r, obj.gradient(theta))) / rr)
    return best
