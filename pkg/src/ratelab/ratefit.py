"""Empirical geometric rates from distance sequences."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, UsageError

DEFAULT_BURN_IN = 0.5
DEFAULT_FLOOR = 1e-12
DEFAULT_TOLERANCE = 0.02
MIN_POINTS = 10


@dataclass(frozen=True)
class RateEstimate:
    rho_hat: float
    residual: float
    window: tuple[int, int]  # half-open [start, stop)
    n_points: int


class Verdict(str, enum.Enum):
    MATCH = "match"
    FASTER = "faster"
    SLOWER = "slower"


def usable_length(distances, floor: float) -> int:
    """Number of leading entries that are finite and not below ``floor``."""
    d = np.asarray(distances, dtype=np.float64)
    bad = ~np.isfinite(d) | (d < floor) | (d <= 0)
    hits = np.flatnonzero(bad)
    return int(hits[0]) if hits.size else d.size


def estimate_rate(distances, burn_in_fraction: float = DEFAULT_BURN_IN,
                  floor: float = DEFAULT_FLOOR) -> RateEstimate:
    """Least-squares slope of ``log distances[n]`` against ``n``.

    Entries from the first one below ``floor`` (or non-finite) onwards are
    dropped, then the leading ``burn_in_fraction`` of what remains.  The fit
    runs on every point of the window, so oscillating sequences are fitted
    through rather than enveloped.
    """
    if not 0 <= burn_in_fraction < 1:
        raise UsageError(f"burn_in_fraction must lie in [0, 1), got {burn_in_fraction}")
    if not floor > 0:
        raise UsageError(f"floor must be > 0, got {floor}")
    d = np.asarray(distances, dtype=np.float64).reshape(-1)
    stop = usable_length(d, floor)
    start = int(math.floor(burn_in_fraction * stop))
    count = stop - start
    if count < MIN_POINTS:
        raise InsufficientDataError(
            f"{count} usable points after burn-in (need {MIN_POINTS}); "
            f"{stop} points above floor {floor:g}")
    n = np.arange(start, stop, dtype=np.float64)
    y = np.log(d[start:stop])
    nc = n - n.mean()
    slope = float(np.dot(nc, y - y.mean()) / np.dot(nc, nc))
    fitted = y.mean() + slope * nc
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return RateEstimate(rho_hat=math.exp(slope), residual=residual,
                        window=(start, stop), n_points=count)


def sup_ratio_statistic(distances, rho: float, log: bool = False) -> float:
    """``max_n rho**-n * distances[n]``, evaluated in log space.

    Boundedness as the sequence grows indicates convergence at rate <= rho.
    Zero distances contribute nothing.  With ``log=True`` the logarithm is
    returned, which stays finite where the statistic itself would overflow.
    """
    if not 0 < rho < 1:
        raise UsageError(f"rho must lie in (0, 1), got {rho}")
    d = np.asarray(distances, dtype=np.float64).reshape(-1)
    n = np.arange(d.size, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logs = np.log(d) - n * math.log(rho)
    best = float(np.max(logs)) if d.size else -math.inf
    if log:
        return best
    return math.exp(best) if best < 709.0 else math.inf


def adjudicate(estimate, predicted: float, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Compare a fitted rate (or a :class:`RateEstimate`) to a prediction."""
    if not tolerance > 0:
        raise UsageError(f"tolerance must be > 0, got {tolerance}")
    rho = estimate.rho_hat if isinstance(estimate, RateEstimate) else float(estimate)
    if abs(rho - predicted) <= tolerance:
        return Verdict.MATCH
    if rho < predicted - tolerance:
        return Verdict.FASTER
    return Verdict.SLOWER
