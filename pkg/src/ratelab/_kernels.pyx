# cython: language_level=3
"""Compiled hot loops. Same contract as ``ratelab._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, log, isfinite, INFINITY

cnp.import_array()

cdef enum:
    GD = 0
    MOMENTUM = 1
    RMSPROP = 2
    ADAM = 3

cdef enum:
    ST_BUDGET = 0
    ST_FLOOR = 1
    ST_DIVERGED = 2


cdef inline double _dist(double[::1] theta, const double[::1] shift, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t j
    cdef double r, acc = 0.0
    for j in range(d):
        r = theta[j] - shift[j]
        acc += r * r
    return sqrt(acc)


def trajectory(int kind, const double[::1] lam, const double[::1] shift, double quartic,
               const double[::1] theta0, double alpha, double beta, double eps, double gamma,
               Py_ssize_t budget, double floor, double blowup):
    cdef Py_ssize_t d = lam.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] it_arr = np.empty((budget + 1, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_arr = np.empty((budget, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lr_arr = np.empty((budget, d))
    cdef double[:, ::1] iterates = it_arr
    cdef double[:, ::1] grads = g_arr
    cdef double[:, ::1] lrs = lr_arr
    cdef double[::1] theta = np.array(theta0, dtype=np.float64)
    cdef double[::1] m = np.zeros(d)
    cdef double[::1] big_m = np.zeros(d)
    cdef double[::1] g = np.zeros(d)
    cdef Py_ssize_t n, j, k = 0, n_grad = 0
    cdef int status = ST_BUDGET
    cdef double r, dist, lr, bc1, bc2
    cdef bint bad

    for j in range(d):
        iterates[0, j] = theta[j]
    dist = _dist(theta, shift, d)
    if dist < floor:
        return it_arr[:1].copy(), g_arr[:0].copy(), lr_arr[:0].copy(), ST_FLOOR

    with nogil:
        for n in range(1, budget + 1):
            bad = False
            for j in range(d):
                r = theta[j] - shift[j]
                g[j] = lam[j] * r + 4.0 * quartic * (r * r * r)
                if not isfinite(g[j]):
                    bad = True
            if bad:
                status = ST_DIVERGED
                break
            n_grad = n
            if kind == ADAM:
                bc1 = 1.0 - pow(alpha, <double>n)
                bc2 = sqrt(1.0 - pow(beta, <double>n))
            for j in range(d):
                grads[n - 1, j] = g[j]
                if kind == GD:
                    lr = gamma
                    theta[j] = theta[j] - gamma * g[j]
                elif kind == MOMENTUM:
                    m[j] = alpha * m[j] + (1.0 - alpha) * g[j]
                    lr = gamma
                    theta[j] = theta[j] - gamma * m[j]
                elif kind == RMSPROP:
                    big_m[j] = beta * big_m[j] + (1.0 - beta) * (g[j] * g[j])
                    lr = gamma / (eps + sqrt(big_m[j]))
                    theta[j] = theta[j] - lr * g[j]
                else:
                    m[j] = alpha * m[j] + (1.0 - alpha) * g[j]
                    big_m[j] = beta * big_m[j] + (1.0 - beta) * (g[j] * g[j])
                    lr = gamma / bc1 / (eps + sqrt(big_m[j]) / bc2)
                    theta[j] = theta[j] - lr * m[j]
                lrs[n - 1, j] = lr
                iterates[n, j] = theta[j]
            k = n
            dist = _dist(theta, shift, d)
            if not isfinite(dist) or dist > blowup:
                status = ST_DIVERGED
                break
            if dist < floor:
                status = ST_FLOOR
                break

    return it_arr[:k + 1].copy(), g_arr[:n_grad].copy(), lr_arr[:n_grad].copy(), status


def gelfand_scan(const double[:, :, ::1] mats, double log_r):
    cdef Py_ssize_t length = mats.shape[0]
    cdef Py_ssize_t order = mats.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = np.full(length, -INFINITY)
    cdef double[::1] best = best_arr
    cdef double[:, ::1] prod = np.empty((order, order))
    cdef double[:, ::1] tmp = np.empty((order, order))
    cdef Py_ssize_t start, end, i, j, l
    cdef double acc, norm, log_scale, val

    with nogil:
        for start in range(length):
            for i in range(order):
                for j in range(order):
                    prod[i, j] = 1.0 if i == j else 0.0
            log_scale = 0.0
            for end in range(start, length):
                norm = 0.0
                for i in range(order):
                    for j in range(order):
                        acc = 0.0
                        for l in range(order):
                            acc = acc + mats[end, i, l] * prod[l, j]
                        tmp[i, j] = acc
                        norm = norm + acc * acc
                norm = sqrt(norm)
                if norm == 0.0:
                    break
                log_scale = log_scale + log(norm)
                val = log_scale - (end - start + 1) * log_r
                if val > best[end]:
                    best[end] = val
                for i in range(order):
                    for j in range(order):
                        prod[i, j] = tmp[i, j] / norm
    return best_arr
