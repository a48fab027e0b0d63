"""Pure numpy implementation of the numerical kernels.

This module mirrors ``gdpmech._kernels`` (the compiled Cython build) function
for function; ``gdpmech._backend`` picks whichever is importable.  Keep the two
in lockstep: the test-suite checks that both agree to rounding error.
"""

import math

import numpy as np

_HALLEY_MAX_ITER = 64


def _w0_start(x):
    if x < 3.0:
        return math.log1p(x)
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x):
    """Principal branch of Lambert W on ``[0, inf)``; Halley iteration."""
    x = float(x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = _w0_start(x)
    for _ in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def lambert_w0_array(x):
    x = np.asarray(x, dtype=float)
    w = np.where(x < 3.0, np.log1p(x), 0.0)
    big = x >= 3.0
    if np.any(big):
        l1 = np.log(x[big])
        l2 = np.log(l1)
        w[big] = l1 - l2 + l2 / l1
    active = (x > 0) & np.isfinite(x)
    for _ in range(_HALLEY_MAX_ITER):
        if not active.any():
            break
        wa = w[active]
        ew = np.exp(wa)
        f = wa * ew - x[active]
        wp1 = wa + 1.0
        dw = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        w[active] = wa - dw
        still = np.abs(dw) > 4e-16 * (1.0 + np.abs(wa - dw))
        idx = np.flatnonzero(active)
        active[idx[~still]] = False
    w = np.where(x == 0, 0.0, w)
    return np.where(np.isinf(x), np.inf, w)


def ncx2_inv_moment(dof, tau, rel_tol, max_terms):
    """E[1/X] for X ~ noncentral chi-square(dof, tau) as a Poisson mixture.

    The Poisson(tau/2) weights are summed outward from their mode so that
    neither ``exp(-tau/2)`` underflow nor factorial overflow occurs.

    Returns ``(value, terms_used, converged)``.
    """
    lam = 0.5 * tau
    if lam == 0.0:
        return 1.0 / (dof - 2.0), 1, True
    mode = math.floor(lam)
    log_w = -lam + mode * math.log(lam) - math.lgamma(mode + 1.0)
    w_mode = math.exp(log_w)

    total = w_mode / (dof - 2.0 + 2.0 * mode)
    terms = 1
    up_done = False
    down_done = mode == 0

    w_up = w_mode
    k_up = mode
    w_dn = w_mode
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


def _bilap_fixed_point(d1, d2):
    return 0.25 * math.exp(-0.5 * (d1 + d2)) * (2.0 + d2)


def _freq_fixed_point(b):
    d = 1.0 / b
    return 0.25 * math.exp(-d) * (2.0 + d)


def _bilap_lower_vec(a, d1, d2):
    dsum = d1 + d2
    a1 = 0.25 * math.exp(-dsum)
    a2 = 0.25 * math.exp(-d1) * (1.0 + d2)
    a3 = 0.25 * math.exp(-d1) * (2.0 + d2)
    out = np.empty_like(a)
    b1 = a < a1
    b2 = ~b1 & (a < a2)
    b3 = ~b1 & ~b2 & (a < a3)
    b4 = ~(b1 | b2 | b3)
    out[b1] = 1.0 - math.exp(dsum) * a[b1]
    if b2.any():
        c = lambert_w0_array(np.exp(np.log(4.0 * a[b2]) + 1.0 + dsum)) - 1.0
        out[b2] = 0.25 * np.exp(-c) * (3.0 + c)
    out[b3] = -math.exp(d1 - d2) * a[b3] + 0.5 * math.exp(-d2) * (2.0 + d2)
    out[b4] = math.exp(-dsum) * (2.0 + d2) ** 2 / (16.0 * a[b4])
    return out


def _freq_lower_vec(a, b):
    d = 1.0 / b
    a1 = 0.25 * math.exp(-2.0 * d)
    a2 = 0.25 * math.exp(-d) * (1.0 + d)
    out = np.empty_like(a)
    b1 = a < a1
    b2 = ~b1 & (a < a2)
    b3 = ~(b1 | b2)
    out[b1] = 1.0 - math.exp(2.0 * d) * a[b1]
    if b2.any():
        c = lambert_w0_array(np.exp(np.log(4.0 * a[b2]) + 1.0 + 2.0 * d)) - 1.0
        out[b2] = 0.25 * np.exp(-c) * (3.0 + c)
    out[b3] = -a[b3] + 0.5 * math.exp(-d) * (2.0 + d)
    return out


def _wm1_start(z):
    # branch-point series near -1/e, asymptotic expansion near 0
    near = z < -0.25
    p = -np.sqrt(np.maximum(2.0 * (1.0 + math.e * z), 0.0))
    series = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    l1 = np.log(-np.where(near, -0.5, z))
    l2 = np.log(-l1)
    asym = l1 - l2 + l2 / l1
    return np.where(near, series, asym)


def lambert_wm1_array(z):
    """Lower real branch of Lambert W on ``[-1/e, 0)``; Halley iteration."""
    z = np.asarray(z, dtype=float)
    w = _wm1_start(z)
    active = z > -math.exp(-1.0)
    for _ in range(_HALLEY_MAX_ITER):
        if not active.any():
            break
        wa = w[active]
        ew = np.exp(wa)
        f = wa * ew - z[active]
        wp1 = wa + 1.0
        dw = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        w[active] = wa - dw
        still = np.abs(dw) > 4e-16 * (1.0 + np.abs(wa - dw))
        idx = np.flatnonzero(active)
        active[idx[~still]] = False
    return np.where(z <= -math.exp(-1.0), -1.0, w)


def _bilap_upper_vec(t, d1, d2):
    """Solve ``lower(u) = t`` for ``t`` between the fixed point and 1.

    By symmetry this is the curve itself above the fixed point.
    """
    dsum = d1 + d2
    t2 = 0.25 * math.exp(-d2) * (3.0 + d2)
    t3 = 0.25 * math.exp(-d2) * (2.0 + d2)
    out = np.empty_like(t)
    b1 = t > 0.75
    b2 = ~b1 & (t > t2)
    b3 = ~b1 & ~b2 & (t > t3)
    b4 = ~(b1 | b2 | b3)
    out[b1] = (1.0 - t[b1]) * math.exp(-dsum)
    if b2.any():
        # (3 + c) e^{-c} = 4 t  with  c >= 0
        c = -lambert_wm1_array(-4.0 * math.exp(-3.0) * t[b2]) - 3.0
        c = np.maximum(c, 0.0)
        out[b2] = 0.25 * (1.0 + c) * np.exp(c - dsum)
    out[b3] = (0.5 * math.exp(-d2) * (2.0 + d2) - t[b3]) * math.exp(d2 - d1)
    out[b4] = math.exp(-dsum) * (2.0 + d2) ** 2 / (16.0 * t[b4])
    return out


def _symmetric_curve(alpha, lower, upper, fixed):
    alpha = np.asarray(alpha, dtype=float)
    flat = alpha.ravel()
    out = np.empty_like(flat)
    low = flat <= fixed
    out[low] = lower(flat[low])
    if (~low).any():
        out[~low] = upper(flat[~low])
    return out.reshape(alpha.shape)


def bilap_lower(alpha, d1, d2):
    alpha = np.asarray(alpha, dtype=float)
    return _bilap_lower_vec(alpha.ravel(), d1, d2).reshape(alpha.shape)


def freq_lower(alpha, b):
    alpha = np.asarray(alpha, dtype=float)
    return _freq_lower_vec(alpha.ravel(), b).reshape(alpha.shape)


def bilap_curve(alpha, d1, d2):
    return _symmetric_curve(
        alpha,
        lambda a: _bilap_lower_vec(a, d1, d2),
        lambda t: _bilap_upper_vec(t, d1, d2),
        _bilap_fixed_point(d1, d2),
    )


def freq_curve(alpha, b):
    # equal shifts: the upper half is the bivariate one with d1 = d2 = 1/b
    d = 1.0 / b
    return _symmetric_curve(
        alpha,
        lambda a: _freq_lower_vec(a, b),
        lambda t: _bilap_upper_vec(t, d, d),
        _freq_fixed_point(b),
    )


def _chisq_terms(obs, expected):
    num = (obs - expected) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = num / expected
    zero_den = expected == 0
    terms = np.where(zero_den & (num == 0), 0.0, terms)
    terms = np.where(zero_den & (num != 0), np.inf, terms)
    return terms


def gof_stat_batch(tables, pi0):
    """Private GOF statistic for each row of a ``(B, p)`` batch."""
    tables = np.asarray(tables, dtype=float)
    pi0 = np.asarray(pi0, dtype=float)
    n = tables.sum(axis=1)
    expected = n[:, None] * pi0[None, :]
    return _chisq_terms(tables, expected).sum(axis=1), n


def hom_stat_batch(tables):
    """Private homogeneity statistic for each ``(r, c)`` slice of a batch."""
    tables = np.asarray(tables, dtype=float)
    n_rows = tables.sum(axis=2)
    n = n_rows.sum(axis=1)
    col = tables.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pooled = np.where(n[:, None] != 0, col / n[:, None], 0.0)
    expected = n_rows[:, :, None] * pooled[:, None, :]
    return _chisq_terms(tables, expected).sum(axis=(1, 2)), n
