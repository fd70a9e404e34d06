"""GD, momentum, RMSprop and Adam in history form and in recursive form.

History form: ``theta_n = theta_{n-1} - gamma * Phi_n(g_1, ..., g_n)`` where
``g_i`` is the gradient at ``theta_{i-1}``.  Costs O(n) per step and is only
used to cross-check the O(1) recursive form, which drives every trajectory.

Moment accumulators start at zero.  Adam adds ``epsilon`` outside the square
root of the bias-corrected second moment.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DivergenceError, UsageError

DEFAULT_FLOOR = 1e-12
DEFAULT_BLOWUP = 1e12


class Kind(str, enum.Enum):
    GD = "GD"
    MOMENTUM = "Momentum"
    RMSPROP = "RMSprop"
    ADAM = "Adam"

    @classmethod
    def parse(cls, name: "str | Kind") -> "Kind":
        if isinstance(name, Kind):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).strip().lower():
                return kind
        raise UsageError(f"unknown optimizer kind {name!r}; expected one of "
                         + ", ".join(k.value for k in cls))

    @property
    def uses_momentum(self) -> bool:
        return self in (Kind.MOMENTUM, Kind.ADAM)

    @property
    def adaptive(self) -> bool:
        return self in (Kind.RMSPROP, Kind.ADAM)


_KIND_CODE = {
    Kind.GD: _backend.GD,
    Kind.MOMENTUM: _backend.MOMENTUM,
    Kind.RMSPROP: _backend.RMSPROP,
    Kind.ADAM: _backend.ADAM,
}


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer kind and hyperparameters.

    GD ignores ``alpha``, ``beta`` and ``epsilon``; momentum ignores ``beta``
    and ``epsilon``; RMSprop ignores ``alpha``.  Adam needs ``alpha`` and
    ``beta`` strictly inside (0, 1) so that both bias corrections are finite.
    """

    kind: Kind
    gamma: float
    alpha: float = 0.0
    beta: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        for name in ("gamma", "alpha", "beta", "epsilon"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise UsageError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.gamma <= 0:
            raise UsageError(f"gamma must be > 0, got {self.gamma}")
        if self.epsilon <= 0:
            raise UsageError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.alpha < 1:
            raise UsageError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise UsageError(f"beta must lie in [0, 1], got {self.beta}")
        if self.kind is Kind.ADAM and not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise UsageError("Adam needs 0 < alpha < 1 and 0 < beta < 1 "
                             f"(got alpha={self.alpha}, beta={self.beta})")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OptimizerState:
    step: int
    theta: np.ndarray
    m: np.ndarray
    big_m: np.ndarray

    @classmethod
    def initial(cls, theta) -> "OptimizerState":
        theta = _frozen(theta).reshape(-1)
        if theta.size == 0:
            raise UsageError("parameter vector must have length >= 1")
        zeros = _frozen(np.zeros_like(theta))
        return cls(0, theta, zeros, zeros)


# ---------------------------------------------------------------------------
# history form
# ---------------------------------------------------------------------------

def _history(history: Sequence) -> np.ndarray:
    try:
        arr = np.array(history, dtype=np.float64)
    except ValueError as exc:  # ragged input
        raise UsageError("history vectors must all have the same length") from exc
    if arr.ndim == 1:  # history of scalars, d = 1
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise UsageError("history must be a nonempty sequence of equal-length vectors")
    return arr


def _decay_weights(rate: float, n: int) -> np.ndarray:
    # rate ** (n - i) for i = 1..n
    return rate ** np.arange(n - 1, -1, -1, dtype=np.float64)


def gd_direction(history) -> np.ndarray:
    """Return the most recent gradient."""
    return _history(history)[-1].copy()


def momentum_direction(history, alpha: float) -> np.ndarray:
    """``(1 - alpha) * sum_i alpha**(n - i) * g_i``."""
    g = _history(history)
    if not 0 <= alpha < 1:
        raise UsageError(f"alpha must lie in [0, 1), got {alpha}")
    return (1.0 - alpha) * (_decay_weights(alpha, len(g)) @ g)


def rmsprop_direction(history, beta: float, epsilon: float) -> np.ndarray:
    """``g_n / (epsilon + sqrt((1 - beta) * sum_i beta**(n - i) * g_i**2))``."""
    g = _history(history)
    if not 0 <= beta < 1:
        raise UsageError(f"beta must lie in [0, 1), got {beta}")
    if epsilon <= 0:
        raise UsageError(f"epsilon must be > 0, got {epsilon}")
    second = (1.0 - beta) * (_decay_weights(beta, len(g)) @ (g * g))
    return g[-1] / (epsilon + np.sqrt(second))


def adam_direction(history, alpha: float, beta: float, epsilon: float) -> np.ndarray:
    """Bias-corrected first moment over ``epsilon`` plus the root of the
    bias-corrected second moment."""
    g = _history(history)
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise UsageError("adam_direction needs 0 < alpha < 1 and 0 < beta < 1; "
                         "use the GD/RMSprop kinds for alpha = 0 or beta = 0")
    if epsilon <= 0:
        raise UsageError(f"epsilon must be > 0, got {epsilon}")
    n = len(g)
    first = (1.0 - alpha) / (1.0 - alpha ** n) * (_decay_weights(alpha, n) @ g)
    second = (1.0 - beta) / (1.0 - beta ** n) * (_decay_weights(beta, n) @ (g * g))
    return first / (epsilon + np.sqrt(second))


def direction(history, config: OptimizerConfig) -> np.ndarray:
    """Dispatch to the history form of ``config.kind``."""
    if config.kind is Kind.GD:
        return gd_direction(history)
    if config.kind is Kind.MOMENTUM:
        return momentum_direction(history, config.alpha)
    if config.kind is Kind.RMSPROP:
        return rmsprop_direction(history, config.beta, config.epsilon)
    return adam_direction(history, config.alpha, config.beta, config.epsilon)


# ---------------------------------------------------------------------------
# recursive form
# ---------------------------------------------------------------------------

def effective_learning_rate(big_m: np.ndarray, step: int,
                            config: OptimizerConfig) -> np.ndarray | None:
    """Per-coordinate step size applied at ``step`` (RMSprop and Adam only).

    For Adam this is ``gamma / (1 - alpha**n) / (eps + sqrt(M_n) / sqrt(1 - beta**n))``
    which tends to ``gamma / eps`` as the second moment vanishes.
    """
    if config.kind is Kind.RMSPROP:
        return config.gamma / (config.epsilon + np.sqrt(big_m))
    if config.kind is Kind.ADAM:
        bc1 = 1.0 - config.alpha ** step
        bc2 = math.sqrt(1.0 - config.beta ** step)
        return config.gamma / bc1 / (config.epsilon + np.sqrt(big_m) / bc2)
    return None


def step_recursive(state: OptimizerState, gradient,
                   config: OptimizerConfig) -> OptimizerState:
    """Advance ``state`` by one step given the gradient at ``state.theta``."""
    g = np.asarray(gradient, dtype=np.float64).reshape(-1)
    if g.shape != state.theta.shape:
        raise UsageError(f"gradient has length {g.size}, expected {state.theta.size}")
    if not np.all(np.isfinite(g)):
        raise DivergenceError(f"non-finite gradient at step {state.step + 1}: {g}")
    n = state.step + 1
    m, big_m = state.m, state.big_m
    kind = config.kind
    if kind is Kind.GD:
        theta = state.theta - config.gamma * g
    elif kind is Kind.MOMENTUM:
        m = config.alpha * m + (1.0 - config.alpha) * g
        theta = state.theta - config.gamma * m
    elif kind is Kind.RMSPROP:
        big_m = config.beta * big_m + (1.0 - config.beta) * (g * g)
        theta = state.theta - effective_learning_rate(big_m, n, config) * g
    else:
        m = config.alpha * m + (1.0 - config.alpha) * g
        big_m = config.beta * big_m + (1.0 - config.beta) * (g * g)
        theta = state.theta - effective_learning_rate(big_m, n, config) * m
    return OptimizerState(n, _frozen(theta), _frozen(m), _frozen(big_m))


def direction_form_equivalence(history, config: OptimizerConfig,
                               atol: float = 1e-12) -> bool:
    """Check ``gamma * Phi_n`` against the recursive displacement for every prefix."""
    g = _history(history)
    state = OptimizerState.initial(np.zeros(g.shape[1]))
    for n in range(1, len(g) + 1):
        nxt = step_recursive(state, g[n - 1], config)
        displacement = state.theta - nxt.theta
        expected = config.gamma * direction(g[:n], config)
        if not np.all(np.abs(displacement - expected) <= atol):
            return False
        state = nxt
    return True


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

class Termination(str, enum.Enum):
    BUDGET = "budget"
    FLOOR = "floor"
    DIVERGED = "divergence"


_STATUS = {
    _backend.BUDGET: Termination.BUDGET,
    _backend.FLOOR: Termination.FLOOR,
    _backend.DIVERGED: Termination.DIVERGED,
}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Orbit of one run.

    ``gradients[n]`` is the gradient at ``iterates[n]``; ``effective_lr[n]``
    is the step size that produced ``iterates[n + 1]``.
    """

    iterates: np.ndarray
    gradients: np.ndarray
    distances: np.ndarray
    effective_lr: np.ndarray | None
    terminated: Termination
    minimizer: np.ndarray

    @property
    def steps_used(self) -> int:
        return len(self.iterates) - 1


def _finish(iterates, grads, lrs, status, minimizer, config) -> Trajectory:
    with np.errstate(over="ignore", invalid="ignore"):
        distances = np.linalg.norm(iterates - minimizer, axis=1)
    return Trajectory(
        iterates=_frozen(iterates),
        gradients=_frozen(grads),
        distances=_frozen(distances),
        effective_lr=_frozen(lrs) if config.kind.adaptive else None,
        terminated=status,
        minimizer=_frozen(minimizer),
    )


def _run_generic(objective, theta0, config, budget, floor, blowup):
    minimizer = np.asarray(objective.minimizer, dtype=np.float64)
    state = OptimizerState.initial(theta0)
    iterates, grads, lrs = [state.theta], [], []
    status = Termination.BUDGET
    if np.linalg.norm(state.theta - minimizer) < floor:
        status = Termination.FLOOR
    else:
        for _ in range(budget):
            g = np.asarray(objective.gradient(state.theta), dtype=np.float64)
            try:
                nxt = step_recursive(state, g, config)
            except DivergenceError:
                status = Termination.DIVERGED
                break
            grads.append(g)
            lr = effective_learning_rate(nxt.big_m, nxt.step, config)
            lrs.append(lr if lr is not None else np.full(g.shape, config.gamma))
            iterates.append(nxt.theta)
            state = nxt
            r = state.theta - minimizer
            dist = math.sqrt(float(np.dot(r, r)))
            if not math.isfinite(dist) or dist > blowup:
                status = Termination.DIVERGED
                break
            if dist < floor:
                status = Termination.FLOOR
                break
    d = len(minimizer)
    return (np.array(iterates).reshape(-1, d), np.array(grads).reshape(-1, d),
            np.array(lrs).reshape(-1, d), status)


def run(objective, init, config: OptimizerConfig, budget: int,
        distance_floor: float = DEFAULT_FLOOR, blowup: float = DEFAULT_BLOWUP,
        backend=None) -> Trajectory:
    """Iterate the recursive form from ``init``.

    Stops when the budget is spent, when the distance to the minimizer drops
    below ``distance_floor``, or when an iterate is non-finite or farther than
    ``blowup``.  Divergence is reported through ``terminated``, not raised.

    Objectives with a separable polynomial gradient go through the compiled
    kernel (or ``backend`` if given); anything else uses a Python loop over
    :func:`step_recursive`.
    """
    theta0 = np.asarray(init, dtype=np.float64).reshape(-1)
    if theta0.shape != (objective.dimension,):
        raise UsageError(f"init has length {theta0.size}, objective dimension "
                         f"is {objective.dimension}")
    if not np.all(np.isfinite(theta0)):
        raise UsageError("init must be finite")
    if int(budget) != budget or budget < 1:
        raise UsageError(f"budget must be a positive integer, got {budget}")
    if distance_floor < 0:
        raise UsageError(f"distance_floor must be >= 0, got {distance_floor}")
    budget = int(budget)
    minimizer = np.asarray(objective.minimizer, dtype=np.float64)

    coeffs = getattr(objective, "separable", None)
    if coeffs is None:
        its, grads, lrs, status = _run_generic(objective, theta0, config, budget,
                                               distance_floor, blowup)
        return _finish(its, grads, lrs, status, minimizer, config)

    spectrum, quartic = coeffs
    impl = backend if backend is not None else _backend
    its, grads, lrs, code = impl.trajectory(
        _KIND_CODE[config.kind],
        np.ascontiguousarray(spectrum, dtype=np.float64),
        np.ascontiguousarray(minimizer),
        float(quartic),
        np.ascontiguousarray(theta0),
        config.alpha, config.beta, config.epsilon, config.gamma,
        budget, float(distance_floor), float(blowup),
    )
    return _finish(its, grads, lrs, _STATUS[code], minimizer, config)
