# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Function-for-function mirror of ``gdpmech._kernels_py``.  Hot loops (both
Lambert W branches inside the trade-off curves, bootstrap chi-square
batches) run without touching Python objects.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, floor, lgamma, fabs, sqrt, INFINITY, isinf

cnp.import_array()

cdef enum:
    HALLEY_MAX_ITER = 64

cdef double INV_E = 0.36787944117144233


cdef inline double _w0(double x) noexcept nogil:
    cdef double w, ew, f, wp1, dw, l1, l2
    cdef int i
    if x == 0.0:
        return 0.0
    if isinf(x):
        return INFINITY
    if x < 3.0:
        w = log1p(x)
    else:
        l1 = log(x)
        l2 = log(l1)
        w = l1 - l2 + l2 / l1
    for i in range(HALLEY_MAX_ITER):
        ew = exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if fabs(dw) <= 4e-16 * (1.0 + fabs(w)):
            break
    return w


cdef inline double _wm1(double z) noexcept nogil:
    cdef double w, ew, f, wp1, dw, p, l1, l2
    cdef int i
    if z <= -INV_E:
        return -1.0
    if z < -0.25:
        p = -sqrt(2.0 * (1.0 + z / INV_E))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    else:
        l1 = log(-z)
        l2 = log(-l1)
        w = l1 - l2 + l2 / l1
    for i in range(HALLEY_MAX_ITER):
        ew = exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if fabs(dw) <= 4e-16 * (1.0 + fabs(w)):
            break
    return w


def lambert_wm1_array(z):
    """Lower real branch of Lambert W on ``[-1/e, 0)``; Halley iteration."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _wm1(flat[i])
    return out.reshape(np.shape(z))


def lambert_w0(double x):
    """Principal branch of Lambert W on ``[0, inf)``; Halley iteration."""
    return _w0(x)


def lambert_w0_array(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _w0(flat[i])
    return out.reshape(np.shape(x))


def ncx2_inv_moment(double dof, double tau, double rel_tol, long max_terms):
    """E[1/X] for X ~ noncentral chi-square(dof, tau) as a Poisson mixture.

    Returns ``(value, terms_used, converged)``.
    """
    cdef double lam = 0.5 * tau
    cdef double w_mode, total, t, w_up, w_dn
    cdef long mode, k_up, k_dn, terms
    cdef bint up_done, down_done
    if lam == 0.0:
        return 1.0 / (dof - 2.0), 1, True
    mode = <long>floor(lam)
    w_mode = exp(-lam + mode * log(lam) - lgamma(mode + 1.0))
    total = w_mode / (dof - 2.0 + 2.0 * mode)
    terms = 1
    up_done = False
    down_done = mode == 0
    w_up = w_mode
    w_dn = w_mode
    k_up = mode
    k_dn = mode
    while not (up_done and down_done):
        if terms >= max_terms:
            return total, terms, False
        if not up_done:
            w_up *= lam / (k_up + 1.0)
            k_up += 1
            t = w_up / (dof - 2.0 + 2.0 * k_up)
            total += t
            terms += 1
            if t <= rel_tol * total:
                up_done = True
        if not down_done:
            w_dn *= k_dn / lam
            k_dn -= 1
            t = w_dn / (dof - 2.0 + 2.0 * k_dn)
            total += t
            terms += 1
            if t <= rel_tol * total or k_dn == 0:
                down_done = True
    return total, terms, True


cdef inline double _bilap_lower(double a, double d1, double d2) noexcept nogil:
    cdef double dsum = d1 + d2
    cdef double c
    if a < 0.25 * exp(-dsum):
        return 1.0 - exp(dsum) * a
    if a < 0.25 * exp(-d1) * (1.0 + d2):
        c = _w0(exp(log(4.0 * a) + 1.0 + dsum)) - 1.0
        return 0.25 * exp(-c) * (3.0 + c)
    if a < 0.25 * exp(-d1) * (2.0 + d2):
        return -exp(d1 - d2) * a + 0.5 * exp(-d2) * (2.0 + d2)
    return exp(-dsum) * (2.0 + d2) * (2.0 + d2) / (16.0 * a)


cdef inline double _freq_lower(double a, double b) noexcept nogil:
    cdef double d = 1.0 / b
    cdef double c
    if a < 0.25 * exp(-2.0 * d):
        return 1.0 - exp(2.0 * d) * a
    if a < 0.25 * exp(-d) * (1.0 + d):
        c = _w0(exp(log(4.0 * a) + 1.0 + 2.0 * d)) - 1.0
        return 0.25 * exp(-c) * (3.0 + c)
    return -a + 0.5 * exp(-d) * (2.0 + d)


cdef inline double _lower(int family, double a, double p1, double p2) noexcept nogil:
    if family == 0:
        return _bilap_lower(a, p1, p2)
    return _freq_lower(a, p1)


cdef inline double _bilap_upper(double t, double d1, double d2) noexcept nogil:
    # solve lower(u) = t for t above the fixed point; by symmetry this is the curve
    cdef double dsum = d1 + d2
    cdef double c
    if t > 0.75:
        return (1.0 - t) * exp(-dsum)
    if t > 0.25 * exp(-d2) * (3.0 + d2):
        c = -_wm1(-4.0 * exp(-3.0) * t) - 3.0
        if c < 0.0:
            c = 0.0
        return 0.25 * (1.0 + c) * exp(c - dsum)
    if t > 0.25 * exp(-d2) * (2.0 + d2):
        return (0.5 * exp(-d2) * (2.0 + d2) - t) * exp(d2 - d1)
    return exp(-dsum) * (2.0 + d2) * (2.0 + d2) / (16.0 * t)


cdef _apply(int family, alpha, double p1, double p2, bint symmetric, double fixed,
            double u1, double u2):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(alpha, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef double a
    with nogil:
        for i in range(n):
            a = flat[i]
            if symmetric and a > fixed:
                out[i] = _bilap_upper(a, u1, u2)
            else:
                out[i] = _lower(family, a, p1, p2)
    return out.reshape(np.shape(alpha))


def bilap_lower(alpha, double d1, double d2):
    return _apply(0, alpha, d1, d2, False, 0.0, d1, d2)


def freq_lower(alpha, double b):
    return _apply(1, alpha, b, 0.0, False, 0.0, 0.0, 0.0)


def bilap_curve(alpha, double d1, double d2):
    cdef double fixed = 0.25 * exp(-0.5 * (d1 + d2)) * (2.0 + d2)
    return _apply(0, alpha, d1, d2, True, fixed, d1, d2)


def freq_curve(alpha, double b):
    # equal shifts: the upper half is the bivariate one with d1 = d2 = 1/b
    cdef double d = 1.0 / b
    cdef double fixed = 0.25 * exp(-d) * (2.0 + d)
    return _apply(1, alpha, b, 0.0, True, fixed, d, d)


cdef inline double _chisq_term(double obs, double expected) noexcept nogil:
    cdef double num = (obs - expected) * (obs - expected)
    if expected == 0.0:
        return 0.0 if num == 0.0 else INFINITY
    return num / expected


def gof_stat_batch(tables, pi0):
    """Private GOF statistic for each row of a ``(B, p)`` batch."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t = np.ascontiguousarray(tables, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pi = np.ascontiguousarray(pi0, dtype=np.float64)
    cdef Py_ssize_t nb = t.shape[0], p = t.shape[1], b, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] stat = np.empty(nb)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ntot = np.empty(nb)
    cdef double n, s
    with nogil:
        for b in range(nb):
            n = 0.0
            for j in range(p):
                n += t[b, j]
            s = 0.0
            for j in range(p):
                s += _chisq_term(t[b, j], n * pi[j])
            stat[b] = s
            ntot[b] = n
    return stat, ntot


def hom_stat_batch(tables):
    """Private homogeneity statistic for each ``(r, c)`` slice of a batch."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] t = np.ascontiguousarray(tables, dtype=np.float64)
    cdef Py_ssize_t nb = t.shape[0], r = t.shape[1], c = t.shape[2], b, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] stat = np.empty(nb)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ntot = np.empty(nb)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rows = np.empty(r)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pooled = np.empty(c)
    cdef double n, s
    with nogil:
        for b in range(nb):
            n = 0.0
            for i in range(r):
                rows[i] = 0.0
                for j in range(c):
                    rows[i] += t[b, i, j]
                n += rows[i]
            for j in range(c):
                pooled[j] = 0.0
                for i in range(r):
                    pooled[j] += t[b, i, j]
                pooled[j] = pooled[j] / n if n != 0.0 else 0.0
            s = 0.0
            for i in range(r):
                for j in range(c):
                    s += _chisq_term(t[b, i, j], rows[i] * pooled[j])
            stat[b] = s
            ntot[b] = n
    return stat, ntot
