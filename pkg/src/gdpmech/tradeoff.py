"""Trade-off functions of hypothesis-testing privacy.

A trade-off function maps a type I error level ``alpha`` to the smallest
achievable type II error ``beta`` when telling two output distributions
apart.  This module provides the closed-form families needed for Gaussian
and Laplace calibration, a pointwise domination check, and an empirical
Neyman-Pearson frontier built from samples, used as a test oracle.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special as sc

from ._backend import kernels
from .errors import DataError, DomainError

__all__ = [
    "TradeoffCurve",
    "GaussianGDP",
    "EpsDP",
    "EpsDeltaDP",
    "UniLaplace",
    "BiLaplace",
    "FreqLaplace",
    "Empirical",
    "Dominance",
    "evaluate",
    "dominates",
    "empirical_tradeoff",
    "mu_from_eps",
    "eps_from_mu",
    "tradeoff_table",
    "write_curve_csv",
]


def _check_alpha(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(np.isnan(a)) or np.any(a < 0.0) or np.any(a > 1.0):
        raise DomainError("alpha must lie in [0, 1]")
    return a


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {value}")
    return value


def _nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0.0):
        raise DomainError(f"{name} must be nonnegative and finite, got {value}")
    return value


class TradeoffCurve:
    """Base class; subclasses implement ``_eval`` on a validated array."""

    family: str = ""

    def __call__(self, alpha):
        a = _check_alpha(alpha)
        out = np.clip(self._eval(a), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def _eval(self, a: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def kinks(self) -> tuple[float, ...]:
        """Points in (0, 1) where the curve is not differentiable."""
        return ()


@dataclass(frozen=True)
class GaussianGDP(TradeoffCurve):
    """``G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu)``."""

    mu: float
    family = "gdp"

    def __post_init__(self):
        object.__setattr__(self, "mu", _positive("mu", self.mu))

    def _eval(self, a):
        # ndtri(0) = -inf and ndtri(1) = inf give the right endpoints
        return sc.ndtr(-sc.ndtri(a) - self.mu)


@dataclass(frozen=True)
class EpsDP(TradeoffCurve):
    """Pure epsilon-DP: ``max(1 - e^eps a, e^-eps (1 - a))``."""

    eps: float
    family = "eps"

    def __post_init__(self):
        object.__setattr__(self, "eps", _positive("eps", self.eps))

    def _eval(self, a):
        e = math.exp(self.eps)
        return np.maximum(1.0 - e * a, (1.0 - a) / e)

    def kinks(self):
        return (1.0 / (1.0 + math.exp(self.eps)),)


@dataclass(frozen=True)
class EpsDeltaDP(TradeoffCurve):
    """Approximate DP: ``max(0, 1 - delta - e^eps a, e^-eps (1 - delta - a))``."""

    eps: float
    delta: float
    family = "epsdelta"

    def __post_init__(self):
        object.__setattr__(self, "eps", _positive("eps", self.eps))
        d = _nonnegative("delta", self.delta)
        if d > 1.0:
            raise DomainError("delta must lie in [0, 1]")
        object.__setattr__(self, "delta", d)

    def _eval(self, a):
        e = math.exp(self.eps)
        q = 1.0 - self.delta
        return np.maximum(0.0, np.maximum(q - e * a, (q - a) / e))

    def kinks(self):
        q = 1.0 - self.delta
        return tuple(k for k in (q / (1.0 + math.exp(self.eps)), q) if 0.0 < k < 1.0)


@dataclass(frozen=True)
class UniLaplace(TradeoffCurve):
    """Lap(0, 1) versus Lap(delta, 1) on the real line."""

    delta: float
    family = "laplace"

    def __post_init__(self):
        object.__setattr__(self, "delta", _nonnegative("delta", self.delta))

    def _eval(self, a):
        d = self.delta
        ed = math.exp(-d)
        with np.errstate(divide="ignore"):
            middle = ed / (4.0 * a)
        out = np.where(a < 0.5 * ed, 1.0 - a / ed, middle)
        return np.where(a >= 0.5, ed * (1.0 - a), out)

    def kinks(self):
        return (0.5 * math.exp(-self.delta), 0.5)


@dataclass(frozen=True)
class BiLaplace(TradeoffCurve):
    """Two-dimensional product Laplace with unit scale and shift
    ``(delta1, delta2)``.

    Signs and order of the shift do not matter; the parameters are stored
    canonicalised so that ``delta1 >= delta2 >= 0``.
    """

    delta1: float
    delta2: float
    family = "bilaplace"

    def __post_init__(self):
        d = sorted((abs(float(self.delta1)), abs(float(self.delta2))), reverse=True)
        for v in d:
            if not math.isfinite(v):
                raise DomainError("BiLaplace shifts must be finite")
        object.__setattr__(self, "delta1", d[0])
        object.__setattr__(self, "delta2", d[1])

    @property
    def fixed_point(self) -> float:
        return 0.25 * math.exp(-0.5 * (self.delta1 + self.delta2)) * (2.0 + self.delta2)

    def lower_branch(self, alpha):
        """Explicit formula, valid for ``alpha`` up to the fixed point."""
        return kernels.bilap_lower(np.asarray(alpha, dtype=float), self.delta1, self.delta2)

    def _eval(self, a):
        return kernels.bilap_curve(a, self.delta1, self.delta2)

    def kinks(self):
        d1, d2 = self.delta1, self.delta2
        lower = [
            0.25 * math.exp(-(d1 + d2)),
            0.25 * math.exp(-d1) * (1.0 + d2),
            0.25 * math.exp(-d1) * (2.0 + d2),
        ]
        lower = [k for k in lower if k < self.fixed_point]
        mirrored = [float(v) for v in self.lower_branch(np.array(lower))]
        return tuple(sorted(set(lower + mirrored + [self.fixed_point])))


@dataclass(frozen=True)
class FreqLaplace(TradeoffCurve):
    """Worst-case Laplace trade-off for a frequency table released with
    noise scale ``b`` (neighbours differ by ``e_i - e_j``)."""

    b: float
    family = "freq"

    def __post_init__(self):
        object.__setattr__(self, "b", _positive("b", self.b))

    @property
    def fixed_point(self) -> float:
        d = 1.0 / self.b
        return 0.25 * math.exp(-d) * (2.0 + d)

    @property
    def interval(self) -> tuple[float, float]:
        """Range of ``alpha`` on which the Lambert-W branch is active."""
        d = 1.0 / self.b
        return 0.25 * math.exp(-2.0 * d), 0.25 * math.exp(-d) * (1.0 + d)

    def lower_branch(self, alpha):
        return kernels.freq_lower(np.asarray(alpha, dtype=float), self.b)

    def _eval(self, a):
        return kernels.freq_curve(a, self.b)

    def kinks(self):
        lower = list(self.interval)
        mirrored = [float(v) for v in self.lower_branch(np.array(lower))]
        return tuple(sorted(set(lower + mirrored + [self.fixed_point])))


@dataclass(frozen=True, eq=False)
class Empirical(TradeoffCurve):
    """Piecewise-linear curve through ``(alpha, beta)`` points.

    ``alpha`` must be strictly increasing and ``beta`` nonincreasing.
    """

    alpha: np.ndarray
    beta: np.ndarray
    n_samples: int = 0
    family = "empirical"

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.ndim != 1 or a.shape != b.shape or a.size < 2:
            raise DataError("alpha and beta must be 1-d arrays of equal length >= 2")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DataError("empirical points must be finite")
        if np.any(np.diff(a) <= 0):
            raise DataError("alpha must be strictly increasing")
        if np.any(np.diff(b) > 0):
            raise DataError("beta must be nonincreasing")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.alpha.tolist(), self.beta.tolist()))

    def _eval(self, a):
        return np.interp(a, self.alpha, self.beta)


def evaluate(curve: TradeoffCurve, alpha):
    """Evaluate ``curve`` at ``alpha`` (scalar or array in [0, 1])."""
    return curve(alpha)


class Dominance(NamedTuple):
    ok: bool
    min_gap: float
    argmin_alpha: float


def dominates(f: TradeoffCurve, g: TradeoffCurve, grid_size: int = 1001,
              tol: float = 1e-12) -> Dominance:
    """Check ``f >= g`` pointwise.

    The difference is evaluated on the open grid ``i/(grid_size+1)`` together
    with the kinks of both curves, where minima of piecewise curves occur.
    """
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    grid = np.arange(1, grid_size + 1) / (grid_size + 1.0)
    extra = [k for k in (*f.kinks(), *g.kinks()) if 0.0 < k < 1.0]
    alpha = np.unique(np.concatenate([grid, np.asarray(extra, dtype=float)]))
    gap = np.asarray(f(alpha)) - np.asarray(g(alpha))
    i = int(np.argmin(gap))
    return Dominance(bool(gap[i] >= -tol), float(gap[i]), float(alpha[i]))


def empirical_tradeoff(
    log_density_ratio: Callable[[np.ndarray], np.ndarray],
    sampler_P: Callable[[np.random.Generator, int], np.ndarray],
    sampler_Q: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int = 100_000,
    seed: int = 0,
    tie_tol: float = 1e-9,
) -> Empirical:
    """Monte Carlo Neyman-Pearson frontier between ``P`` and ``Q``.

    Parameters
    ----------
    log_density_ratio : callable
        Maps a batch of sample points to ``log dQ/dP``.  Any scalar score
        works; the likelihood ratio gives the most powerful tests, other
        scores give a curve lying above the true one.
    sampler_P, sampler_Q : callable
        ``sampler(rng, n)`` returns ``n`` draws.
    n_samples : int
        Draws per distribution, at least ``10_000``.
    seed : int
        Seed for the two independent generator streams.
    tie_tol : float
        Scores closer than ``tie_tol * max(1, |score|)`` are treated as one
        atom, so rounding noise inside a point mass cannot order the draws.

    Returns
    -------
    Empirical
        Tests reject for large scores.  Ties at atoms are randomised, which
        amounts to linear interpolation between adjacent ROC corners.
    """
    n = int(n_samples)
    if n < 10_000:
        raise DomainError("n_samples must be at least 10000")
    ss_p, ss_q = np.random.SeedSequence(int(seed)).spawn(2)
    lp = np.asarray(log_density_ratio(sampler_P(np.random.default_rng(ss_p), n)), dtype=float)
    lq = np.asarray(log_density_ratio(sampler_Q(np.random.default_rng(ss_q), n)), dtype=float)
    if lp.shape != (n,) or lq.shape != (n,):
        raise DataError("log_density_ratio must return one value per sample")
    if not (np.all(np.isfinite(lp)) and np.all(np.isfinite(lq))):
        raise DataError("log_density_ratio produced non-finite values")

    if not tie_tol >= 0.0:
        raise DomainError("tie_tol must be non-negative")
    values, inverse = np.unique(np.concatenate([lp, lq]), return_inverse=True)
    gap = np.diff(values) > tie_tol * np.maximum(1.0, np.abs(values[1:]))
    group = np.r_[0, np.cumsum(gap)]
    inverse = group[inverse]
    m = int(group[-1]) + 1
    cnt_p = np.bincount(inverse[:n], minlength=m)[::-1]
    cnt_q = np.bincount(inverse[n:], minlength=m)[::-1]
    # corners as the rejection threshold sweeps from +inf downwards
    alpha = np.concatenate([[0.0], np.cumsum(cnt_p) / n])
    beta = np.concatenate([[1.0], 1.0 - np.cumsum(cnt_q) / n])
    alpha[-1], beta[-1] = 1.0, 0.0
    # collapse repeated alpha to the lowest beta
    last = np.r_[alpha[1:] != alpha[:-1], True]
    return Empirical(alpha[last], beta[last], n_samples=n)


def eps_from_mu(mu: float) -> float:
    """Smallest epsilon such that epsilon-DP implies mu-GDP."""
    mu = _positive("mu", mu)
    return float(sc.log_ndtr(0.5 * mu) - sc.log_ndtr(-0.5 * mu))


def mu_from_eps(eps: float) -> float:
    """Inverse of :func:`eps_from_mu`: ``2 Phi^{-1}(e^eps / (1 + e^eps))``."""
    eps = _positive("eps", eps)
    # -2 Phi^{-1}(1/(1+e^eps)) stays accurate for large eps
    return float(-2.0 * sc.ndtri(sc.expit(-eps)))


def tradeoff_table(curve: TradeoffCurve, grid_size: int = 1001) -> np.ndarray:
    """``(grid_size, 2)`` array of ``alpha`` on a closed uniform grid and ``beta``."""
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    alpha = np.linspace(0.0, 1.0, int(grid_size))
    return np.column_stack([alpha, curve(alpha)])


def write_curve_csv(curve: TradeoffCurve, dest=None, grid_size: int = 1001) -> str:
    """Write ``alpha,beta`` rows to ``dest`` (path or text file); return the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "beta"])
    for a, b in tradeoff_table(curve, grid_size):
        w.writerow([repr(float(a)), repr(float(b))])
    text = buf.getvalue()
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif dest is not None:
        dest.write(text)
    return text
