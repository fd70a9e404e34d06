"""Pure NumPy implementations of the hot loops.

Mirrors ``_kernels.pyx`` operation for operation so both backends produce
the same floating-point results on the same inputs.
"""

import math

import numpy as np

GD, MOMENTUM, RMSPROP, ADAM = 0, 1, 2, 3
BUDGET, FLOOR, DIVERGED = 0, 1, 2


def trajectory(kind, lam, shift, quartic, theta0, alpha, beta, eps, gamma,
               budget, floor, blowup):
    """Iterate one optimizer on a separable polynomial objective.

    The gradient is ``lam * r + 4 * quartic * r**3`` with ``r = theta - shift``.
    Returns ``(iterates, gradients, effective_lr, status)``.
    """
    lam = np.asarray(lam, dtype=np.float64)
    shift = np.asarray(shift, dtype=np.float64)
    d = lam.shape[0]
    iterates = np.empty((budget + 1, d))
    grads = np.empty((budget, d))
    lrs = np.empty((budget, d))
    theta = np.array(theta0, dtype=np.float64)
    m = np.zeros(d)
    big_m = np.zeros(d)
    iterates[0] = theta

    r = theta - shift
    dist = math.sqrt(float(np.dot(r, r)))
    if dist < floor:
        return iterates[:1], grads[:0], lrs[:0], FLOOR

    status = BUDGET
    k = 0
    n_grad = 0
    for n in range(1, budget + 1):
        r = theta - shift
        g = lam * r + 4.0 * quartic * (r * r * r)
        if not np.all(np.isfinite(g)):
            status = DIVERGED
            break
        grads[n - 1] = g
        n_grad = n
        if kind == GD:
            lr = np.full(d, gamma)
            theta = theta - gamma * g
        elif kind == MOMENTUM:
            m = alpha * m + (1.0 - alpha) * g
            lr = np.full(d, gamma)
            theta = theta - gamma * m
        elif kind == RMSPROP:
            big_m = beta * big_m + (1.0 - beta) * (g * g)
            lr = gamma / (eps + np.sqrt(big_m))
            theta = theta - lr * g
        else:
            m = alpha * m + (1.0 - alpha) * g
            big_m = beta * big_m + (1.0 - beta) * (g * g)
            bc1 = 1.0 - alpha ** n
            bc2 = math.sqrt(1.0 - beta ** n)
            lr = gamma / bc1 / (eps + np.sqrt(big_m) / bc2)
            theta = theta - lr * m
        lrs[n - 1] = lr
        iterates[n] = theta
        k = n
        r = theta - shift
        dist = math.sqrt(float(np.dot(r, r)))
        if not math.isfinite(dist) or dist > blowup:
            status = DIVERGED
            break
        if dist < floor:
            status = FLOOR
            break
    return iterates[:k + 1].copy(), grads[:n_grad].copy(), lrs[:n_grad].copy(), status


def gelfand_scan(mats, log_r):
    """Best log-ratio ``log ||A_m ... A_{n+1}||_F - (m - n) log_r`` per end index.

    Entry ``m - 1`` of the result is the maximum over ``0 <= n < m``.
    Products are renormalised after every multiplication and the scale is
    carried in log space.
    """
    mats = np.asarray(mats, dtype=np.float64)
    length = mats.shape[0]
    best = np.full(length, -np.inf)
    for start in range(length):
        prod = np.eye(mats.shape[1])
        log_scale = 0.0
        for end in range(start, length):
            prod = mats[end] @ prod
            norm = math.sqrt(float(np.sum(prod * prod)))
            if norm == 0.0:
                break
            log_scale += math.log(norm)
            val = log_scale - (end - start + 1) * log_r
            if val > best[end]:
                best[end] = val
            prod = prod / norm
    return best
