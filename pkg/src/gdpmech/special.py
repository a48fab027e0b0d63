"""Scalar special functions: normal cdf/quantile, Lambert W, and the
inverse first moment of a noncentral chi-square distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from ._backend import kernels
from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "std_normal_cdf",
    "std_normal_quantile",
    "std_normal_logcdf",
    "lambert_w0",
    "noncentral_chisq_inv_moment",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for infinite series.

    Attributes
    ----------
    rel_tol : float
        Stop once a new term is below ``rel_tol`` times the partial sum.
    max_terms : int
        Hard cap on the number of terms; exceeding it raises
        :class:`~gdpmech.errors.ConvergenceError`.
    """

    rel_tol: float = 1e-13
    max_terms: int = 100_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if int(self.max_terms) < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


def _check_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def std_normal_cdf(x):
    """Standard normal distribution function Phi(x).

    Accepts scalars or arrays.  Non-finite input raises ``DomainError``.
    """
    arr = _check_finite(x)
    out = sc.ndtr(arr)
    return float(out) if out.ndim == 0 else out


def std_normal_logcdf(x):
    """log Phi(x), accurate deep in the lower tail."""
    arr = _check_finite(x)
    out = sc.log_ndtr(arr)
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("p must lie strictly inside (0, 1)")
    out = sc.ndtri(arr)
    return float(out) if out.ndim == 0 else out


def lambert_w0(x):
    """Principal branch W0 of the Lambert W function on ``[0, inf)``.

    Solves ``w * exp(w) = x`` by Halley iteration.  Arrays are handled
    elementwise.

    Raises
    ------
    DomainError
        If any ``x`` is negative or NaN.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("lambert_w0 is only defined here for x >= 0")
    if arr.ndim == 0:
        return kernels.lambert_w0(float(arr))
    return kernels.lambert_w0_array(arr)


def noncentral_chisq_inv_moment(dof: float, tau: float,
                                ctrl: SeriesControl | None = None) -> float:
    """E[1/X] for X following a noncentral chi-square law.

    Evaluated as the Poisson(tau/2) mixture
    ``sum_k w_k / (dof + 2k - 2)``, summed outward from the Poisson mode so
    that very large ``tau`` neither underflows nor overflows.

    Parameters
    ----------
    dof : float
        Degrees of freedom; any real ``dof > 2`` is accepted.
    tau : float
        Noncentrality parameter, ``tau >= 0``.
    ctrl : SeriesControl, optional
        Series tolerance and term cap.

    Returns
    -------
    float
        A value in ``(0, 1/(dof-2)]``.
    """
    ctrl = ctrl or SeriesControl()
    dof = float(dof)
    tau = float(tau)
    if not math.isfinite(dof) or dof <= 2.0:
        raise DomainError(f"dof must exceed 2, got {dof}")
    if not math.isfinite(tau) or tau < 0.0:
        raise DomainError(f"tau must be finite and nonnegative, got {tau}")
    value, terms, ok = kernels.ncx2_inv_moment(dof, tau, ctrl.rel_tol, int(ctrl.max_terms))
    if not ok:
        raise ConvergenceError(
            f"series did not converge within {ctrl.max_terms} terms (dof={dof}, tau={tau})"
        )
    return float(value)
