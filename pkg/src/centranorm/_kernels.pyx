# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numerical kernels in ``_kernels_py``.

Same contracts, same algorithms; the Huber sweeps and loss sums run as plain
C loops, which is what makes the many small-array objective evaluations of
the fitting pipeline cheap. Keep in sync with the pure-NumPy module.
"""

import numpy as np

from libc.math cimport (INFINITY, M_PI, erfc, exp, expm1, fabs, isfinite,
                        isnan, log, log1p, sqrt)

IS_COMPILED = True

MAD_SCALE = 1.4826022185056018
cdef double _MAD_SCALE = 1.4826022185056018


cdef double _winsor_beta(double b) nogil:
    # E[psi_b(Z)^2] for Z ~ N(0,1) with psi_b(t) = clamp(t, -b, b).
    cdef double th = 1.0 - erfc(b / sqrt(2.0))
    cdef double dens = exp(-0.5 * b * b) / sqrt(2.0 * M_PI)
    return th + b * b * (1.0 - th) - 2.0 * b * dens


cdef inline double _plain1(double x, double lam, int kind) nogil:
    if lam == 1.0:  # affine member: keep it exact
        return x - 1.0 if kind == 0 else x
    if kind == 0:  # Box-Cox, caller guarantees x > 0
        if lam == 0.0:
            return log(x)
        return expm1(lam * log(x)) / lam
    if x >= 0.0:
        if lam == 0.0:
            return log1p(x)
        return expm1(lam * log1p(x)) / lam
    if lam == 2.0:
        return -log1p(-x)
    return -expm1((2.0 - lam) * log1p(-x)) / (2.0 - lam)


def transform(x, double lam, int kind, double cl, double g_cl, double s_cl,
              double cu, double g_cu, double s_cu):
    """Evaluate the power transform, linearized beyond any active knot."""
    xa = np.ascontiguousarray(x, dtype=np.float64)
    out_arr = np.empty(xa.shape[0], dtype=np.float64)
    cdef double[::1] xv = xa
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef bint has_lo = not isnan(cl)
    cdef bint has_hi = not isnan(cu)
    cdef double xi
    with nogil:
        for i in range(n):
            xi = xv[i]
            if has_lo and xi < cl:
                out[i] = g_cl + (xi - cl) * s_cl
            elif has_hi and xi > cu:
                out[i] = g_cu + (xi - cu) * s_cu
            else:
                out[i] = _plain1(xi, lam, kind)
    return out_arr


cdef double _median_sorted(double* z, Py_ssize_t n) nogil:
    if n & 1:
        return z[n >> 1]
    return 0.5 * (z[(n >> 1) - 1] + z[n >> 1])


cdef double _kth_absdev_sorted(double* z, Py_ssize_t n, double med, Py_ssize_t k) nogil:
    # k-th smallest (0-based) of |z[i] - med| for ascending z: the distances
    # grow outward from the crossing point, so merge the two sorted runs.
    cdef Py_ssize_t lo_idx = 0, hi_idx = n, mid
    while lo_idx < hi_idx:  # first index with z[idx] >= med
        mid = (lo_idx + hi_idx) >> 1
        if z[mid] < med:
            lo_idx = mid + 1
        else:
            hi_idx = mid
    cdef Py_ssize_t li = lo_idx - 1, ri = lo_idx, taken = 0
    cdef double dl, dr, val
    while True:
        dl = med - z[li] if li >= 0 else INFINITY
        dr = z[ri] - med if ri < n else INFINITY
        if dl <= dr:
            val = dl
            li -= 1
        else:
            val = dr
            ri += 1
        if taken == k:
            return val
        taken += 1


cdef void _huber_core(double* z, Py_ssize_t n, double b, double tol, int maxit,
                      double* loc_out, double* scale_out, int* it_out,
                      int* conv_out) nogil:
    cdef double med = _median_sorted(z, n)
    cdef Py_ssize_t half = n >> 1
    cdef double mad
    if n & 1:
        mad = _kth_absdev_sorted(z, n, med, half)
    else:
        mad = 0.5 * (_kth_absdev_sorted(z, n, med, half - 1)
                     + _kth_absdev_sorted(z, n, med, half))
    mad *= _MAD_SCALE
    if not (mad > 0.0 and isfinite(mad)):
        loc_out[0] = med
        scale_out[0] = 0.0
        it_out[0] = 0
        conv_out[0] = 0
        return
    cdef double beta = _winsor_beta(b)
    cdef double mu = med, s = mad
    cdef double mu1, s1, lo, hi, acc, ss, w
    cdef bint done
    cdef Py_ssize_t i
    cdef int it
    for it in range(1, maxit + 1):
        lo = mu - b * s
        hi = mu + b * s
        acc = 0.0
        for i in range(n):
            w = z[i]
            if w < lo:
                w = lo
            elif w > hi:
                w = hi
            acc += w
        mu1 = acc / n
        ss = 0.0
        for i in range(n):
            w = z[i]
            if w < lo:
                w = lo
            elif w > hi:
                w = hi
            ss += (w - mu1) * (w - mu1)
        ss = ss / ((n - 1) * beta)
        s1 = sqrt(ss) if ss > 0.0 else 0.0
        done = fabs(mu1 - mu) < tol * s and fabs(s1 - s) < tol * s
        mu = mu1
        s = s1
        if s == 0.0:
            loc_out[0] = mu
            scale_out[0] = 0.0
            it_out[0] = it
            conv_out[0] = 0
            return
        if done:
            loc_out[0] = mu
            scale_out[0] = s
            it_out[0] = it
            conv_out[0] = 1
            return
    loc_out[0] = mu
    scale_out[0] = s
    it_out[0] = maxit
    conv_out[0] = 0


def huber_sorted(z, double b, double tol, int maxit):
    """Huber M-estimates of location and scale on ascending data.

    Returns ``(location, scale, iterations, converged)``; zero scale flags
    degenerate data.
    """
    za = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] zv = za
    cdef double loc = 0.0, scale = 0.0
    cdef int it = 0, conv = 0
    with nogil:
        _huber_core(&zv[0], zv.shape[0], b, tol, maxit, &loc, &scale, &it, &conv)
    return loc, scale, it, conv


def criterion_sorted(z, q, double c, double b, double tol, int maxit):
    """Bounded-loss discrepancy between standardized data and normal quantiles."""
    za = np.ascontiguousarray(z, dtype=np.float64)
    qa = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] zv = za
    cdef double[::1] qv = qa
    cdef Py_ssize_t i, n = zv.shape[0]
    cdef double loc = 0.0, scale = 0.0
    cdef int it = 0, conv = 0
    cdef double total = 0.0, r, t2, u
    with nogil:
        _huber_core(&zv[0], n, b, tol, maxit, &loc, &scale, &it, &conv)
        if not (scale > 0.0 and isfinite(scale)):
            total = INFINITY
        else:
            for i in range(n):
                r = (zv[i] - loc) / scale - qv[i]
                t2 = (r / c) * (r / c)
                if t2 <= 1.0:
                    u = 1.0 - t2
                    total += 1.0 - u * u * u
                else:
                    total += 1.0
    return total


def mean_var(z):
    """Mean and 1/n variance in one place, two-pass for accuracy."""
    za = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] zv = za
    cdef Py_ssize_t i, n = zv.shape[0]
    cdef double acc = 0.0, m, v = 0.0, d
    with nogil:
        for i in range(n):
            acc += zv[i]
        m = acc / n
        for i in range(n):
            d = zv[i] - m
            v += d * d
        v /= n
    return m, v
