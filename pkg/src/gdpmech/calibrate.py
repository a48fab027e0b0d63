"""Smallest noise scales that make Gaussian or Laplace releases mu-GDP."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize
from scipy import special as sc

from .errors import CalibrationError, DomainError
from .tradeoff import EpsDP, FreqLaplace, GaussianGDP, UniLaplace, dominates, eps_from_mu

__all__ = [
    "Method",
    "NoiseCalibration",
    "gaussian_sigma",
    "laplace_b_universal",
    "laplace_b_l1",
    "laplace_b_freq",
    "mu_from_laplace_b",
    "freq_gap",
]

FREQ_DELTA1 = 2.0
_BISECT_MAX_ITER = 200


class Method(str, enum.Enum):
    GaussianSigma = "gaussian"
    LaplaceUniversal = "universal"
    LaplaceL1 = "l1"
    LaplaceFreq = "freq"


@dataclass(frozen=True)
class NoiseCalibration:
    """Result of a calibration.

    ``scale`` is the Gaussian standard deviation or the Laplace scale.
    ``certified_gap`` is the smallest observed value of (mechanism trade-off
    minus ``G_mu``); it is nonnegative up to rounding when the scale is
    valid.
    """

    mu: float
    method: Method
    scale: float
    certified_gap: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise CalibrationError(f"calibrated scale {self.scale} is not positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _pos(name, v):
    v = float(v)
    if not (math.isfinite(v) and v > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {v}")
    return v


def gaussian_sigma(mu: float, delta2: float) -> NoiseCalibration:
    """``sigma = delta2 / mu``; the resulting trade-off is exactly ``G_mu``."""
    mu, delta2 = _pos("mu", mu), _pos("delta2", delta2)
    return NoiseCalibration(mu, Method.GaussianSigma, delta2 / mu, 0.0)


def laplace_b_universal(mu: float, delta1: float) -> NoiseCalibration:
    """Laplace scale valid for any statistic with L1 sensitivity ``delta1``.

    Uses ``b = delta1 / eps_mu``, the pure-DP level that implies mu-GDP.
    """
    mu, delta1 = _pos("mu", mu), _pos("delta1", delta1)
    eps = eps_from_mu(mu)
    gap = dominates(EpsDP(eps), GaussianGDP(mu)).min_gap
    return NoiseCalibration(mu, Method.LaplaceUniversal, delta1 / eps, gap)


def laplace_b_l1(mu: float, delta1: float) -> NoiseCalibration:
    """Laplace scale when the worst neighbour shift is one-dimensional.

    ``b = delta1 / (-2 log(2 Phi(-mu/2)))``.
    """
    mu, delta1 = _pos("mu", mu), _pos("delta1", delta1)
    denom = -2.0 * (math.log(2.0) + float(sc.log_ndtr(-0.5 * mu)))
    b = delta1 / denom
    gap = dominates(UniLaplace(delta1 / b), GaussianGDP(mu)).min_gap
    return NoiseCalibration(mu, Method.LaplaceL1, b, gap)


def mu_from_laplace_b(b: float, delta1: float) -> float:
    """GDP level of a Laplace scale: ``-2 Phi^{-1}(exp(-delta1/(2b)) / 2)``."""
    b, delta1 = _pos("b", b), _pos("delta1", delta1)
    return float(-2.0 * sc.ndtri(0.5 * math.exp(-0.5 * delta1 / b)))


def freq_gap(b: float, mu: float, grid_size: int = 2001) -> tuple[float, float]:
    """Minimum of ``L_freq(b) - G_mu`` over the Lambert-W interval.

    Outside that interval the frequency-table curve is linear while
    ``G_mu`` is convex, so the global minimum is attained inside it.  A
    uniform grid locates the basin; bounded Brent refines it.

    Returns
    -------
    (gap, alpha)
    """
    curve = FreqLaplace(b)
    lo, hi = curve.interval

    def diff(a):
        a = np.asarray(a, dtype=float)
        return curve.lower_branch(a) - sc.ndtr(-sc.ndtri(a) - mu)

    grid = np.linspace(lo, hi, int(grid_size))
    vals = diff(grid)
    i = int(np.argmin(vals))
    best, best_a = float(vals[i]), float(grid[i])
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if right > left:
        res = optimize.minimize_scalar(
            lambda a: float(diff(a)), bounds=(left, right), method="bounded",
            options={"xatol": 1e-15 * max(1.0, right)},
        )
        if res.fun < best:
            best, best_a = float(res.fun), float(res.x)
    return best, best_a


def laplace_b_freq(mu: float, tol: float = 1e-8, grid_size: int = 2001) -> NoiseCalibration:
    """Smallest Laplace scale making a frequency-table release mu-GDP.

    Bisection on ``b`` over ``[0, b_eps]`` where ``b_eps`` is the universal
    scale for ``delta1 = 2``.  The gap function is nondecreasing in ``b``.
    The upper (feasible) endpoint is returned, so the result never
    undershoots.

    Parameters
    ----------
    mu : float
        Target GDP level.
    tol : float
        Stop once the gap at the feasible endpoint lies in ``[0, tol]``.
    grid_size : int
        Points in the inner grid minimisation, at least 101.

    Raises
    ------
    CalibrationError
        If the universal scale is not feasible (internal inconsistency).
    """
    mu, tol = _pos("mu", mu), _pos("tol", tol)
    if int(grid_size) < 101:
        raise DomainError("grid_size must be at least 101")
    b_hi = laplace_b_universal(mu, FREQ_DELTA1).scale
    b_lo = 0.0
    g_hi, _ = freq_gap(b_hi, mu, grid_size)
    if g_hi < 0.0:
        raise CalibrationError(f"upper bracket b={b_hi} is infeasible (gap {g_hi:.3e})")
    it = 0
    while g_hi > tol and it < _BISECT_MAX_ITER:
        it += 1
        mid = 0.5 * (b_lo + b_hi)
        if mid <= b_lo or mid >= b_hi:
            break
        g_mid, _ = freq_gap(mid, mu, grid_size)
        if g_mid >= 0.0:
            b_hi, g_hi = mid, g_mid
        else:
            b_lo = mid
    return NoiseCalibration(mu, Method.LaplaceFreq, b_hi, g_hi, it)
