"""Expected losses of the release mechanisms.

Closed forms for the squared-error (L2) cost and L_r moments, the
Laplace-versus-Gaussian relative efficiency, and a chunked Monte Carlo
estimator whose output does not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize
from scipy import special as sc

from ._parallel import CHUNK, run_chunks
from .errors import DomainError
from .mechanisms import Mechanism, MechanismConfig, rng_for
from .sensitivity import SensitivitySpec, frequency_table_spec
from .special import SeriesControl, noncentral_chisq_inv_moment

__all__ = [
    "CostQuery",
    "l2_cost_analytic",
    "lr_cost_laplace",
    "lr_cost_gaussian",
    "relative_efficiency",
    "re_crossover",
    "monte_carlo_cost",
    "simulate_costs",
    "MC_CHUNK",
]

MC_CHUNK = CHUNK


@dataclass(frozen=True, eq=False)
class CostQuery:
    """Inputs of an analytic cost evaluation.

    ``scale`` is sigma for Gaussian-family mechanisms and b for Laplace.
    ``theta`` is needed by the shrinkage mechanisms, ``basis`` by ``rjs``.
    """

    mechanism: Mechanism
    p: int
    scale: float
    d_theta: int | None = None
    theta: np.ndarray | None = None
    basis: np.ndarray | None = None
    r: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.r < 1.0:
            raise DomainError("r must be >= 1")
        if not self.scale > 0.0:
            raise DomainError("scale must be positive")
        if self.theta is not None:
            t = np.asarray(self.theta, dtype=float)
            if t.shape != (self.p,):
                raise DomainError(f"theta must have length p={self.p}")
            object.__setattr__(self, "theta", t)

    @classmethod
    def from_config(cls, config: MechanismConfig, theta=None) -> "CostQuery":
        spec = config.spec
        p = spec.p if spec is not None else int(np.asarray(theta).size)
        return cls(
            config.kind, p, config.scale,
            d_theta=spec.d_theta if spec is not None else None,
            theta=theta,
            basis=spec.basis if spec is not None else None,
        )


def _need_theta(q: CostQuery) -> np.ndarray:
    if q.theta is None:
        raise DomainError(f"{q.mechanism.value} cost depends on theta; none given")
    return q.theta


def l2_cost_analytic(q: CostQuery, ctrl: SeriesControl | None = None) -> float:
    """``E |M(S) - theta(S)|^2`` in closed form (untruncated releases).

    The shrinkage costs are ``s^2 k - s^2 (k - c)^2 E[1/X]`` with ``X`` a
    noncentral chi-square variable whose dimension and noncentrality depend
    on the shrinkage target.
    """
    m, p, s2 = q.mechanism, q.p, q.scale**2
    if m is Mechanism.Gaussian:
        return p * s2
    if m is Mechanism.Laplace:
        return 2.0 * p * s2
    if m is Mechanism.RankDeficient:
        if q.d_theta is None:
            raise DomainError("rank cost needs d_theta")
        return q.d_theta * s2
    if m is Mechanism.JamesSteinZero:
        if p < 3:
            raise DomainError("js0 needs p >= 3")
        theta = _need_theta(q)
        tau = float(theta @ theta) / s2
        return s2 * p - s2 * (p - 2) ** 2 * noncentral_chisq_inv_moment(p, tau, ctrl)
    if m is Mechanism.JamesSteinAvg:
        if p < 4:
            raise DomainError("js needs p >= 4")
        theta = _need_theta(q)
        tc = theta - theta.mean()
        tau = float(tc @ tc) / s2
        return s2 * p - s2 * (p - 3) ** 2 * noncentral_chisq_inv_moment(p - 1, tau, ctrl)
    # rank-deficient James-Stein
    d = q.d_theta
    if d is None or q.basis is None:
        raise DomainError("rjs cost needs d_theta and a basis")
    if d < 4:
        raise DomainError("rjs needs d_theta >= 4")
    coords = _need_theta(q) @ q.basis
    cc = coords - coords.mean()
    tau = float(cc @ cc) / s2
    return s2 * d - s2 * (d - 3) ** 2 * noncentral_chisq_inv_moment(d - 1, tau, ctrl)


def lr_cost_laplace(p: int, b: float, r: float) -> float:
    """``E sum |xi_i|^r`` for ``p`` iid Laplace(0, b): ``p b^r Gamma(r+1)``."""
    if r < 1.0 or b <= 0.0 or p < 1:
        raise DomainError("need p >= 1, b > 0, r >= 1")
    return float(p * b**r * sc.gamma(r + 1.0))


def lr_cost_gaussian(p: int, sigma: float, r: float) -> float:
    """``E sum |xi_i|^r`` for ``p`` iid N(0, sigma^2).

    Equals ``p sigma^r 2^(r/2) Gamma((r+1)/2) / sqrt(pi)``.
    """
    if r < 1.0 or sigma <= 0.0 or p < 1:
        raise DomainError("need p >= 1, sigma > 0, r >= 1")
    return float(p * sigma**r * 2.0 ** (r / 2.0) * sc.gamma(0.5 * (r + 1.0)) / math.sqrt(math.pi))


def _l1_denominator(mu: float) -> float:
    return -2.0 * (math.log(2.0) + float(sc.log_ndtr(-0.5 * mu)))


def relative_efficiency(mu: float, ratio: float, r: float) -> float:
    """L_r cost of Laplace over that of Gaussian noise at equal GDP level.

    Laplace is calibrated through the L1 sensitivity and Gaussian through
    the L2 sensitivity; ``ratio = delta1 / delta2``.  Values above one
    favour Gaussian noise.
    """
    if mu <= 0.0 or ratio < 1.0 or r < 1.0:
        raise DomainError("need mu > 0, ratio >= 1, r >= 1")
    return float(
        ratio**r * 2.0 ** (r / 2.0) * sc.gamma(0.5 * r + 1.0) * (mu / _l1_denominator(mu)) ** r
    )


def re_crossover(ratio: float = 1.0, r: float = 2.0, bracket=(1e-3, 50.0)) -> float:
    """``mu`` at which :func:`relative_efficiency` equals one."""
    f = lambda mu: math.log(relative_efficiency(mu, ratio, r))
    return float(optimize.brentq(f, *bracket, xtol=1e-12))


def monte_carlo_cost(config: MechanismConfig, theta, reps: int = 10_000, seed: int = 0,
                     threads: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate of ``E |M(theta) - theta|^2``.

    Replicates are split into fixed-size chunks, chunk ``i`` using the
    random stream ``(seed, i)``; thread count only changes scheduling.

    Returns
    -------
    (mean, std_error)
        Sample mean of per-replicate squared errors and its standard error.
    """
    reps = int(reps)
    if reps < 100:
        raise DomainError("reps must be >= 100")
    theta = np.asarray(theta, dtype=float)
    config.check_dim(theta.size)

    def work(i, _start, n):
        out = config.release_batch(theta, rng_for(seed, i), n)
        return np.sum((out - theta) ** 2, axis=1)

    losses = run_chunks(work, reps, threads)
    return float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(reps))


def simulate_costs(
    pi: Sequence[float],
    n_grid: Iterable[int],
    mu: float,
    mechanisms: Iterable[str] = ("gaussian", "rank", "js0", "js", "rjs", "laplace"),
    reps: int = 10_000,
    seed: int = 0,
    truncate: bool = False,
    threads: int | None = None,
    spec: SensitivitySpec | None = None,
) -> list[dict]:
    """Cost of each mechanism on frequency tables drawn as Multinomial(n, pi).

    Every replicate draws a fresh table, releases it, and records the
    squared error against that table.  Rows of the result carry ``n``,
    ``mechanism``, ``mean_cost`` and ``std_error``.
    """
    pi = np.asarray(pi, dtype=float)
    spec = spec or frequency_table_spec(pi.size)
    rows = []
    for gi, n in enumerate(n_grid):
        for mi, name in enumerate(mechanisms):
            cfg = MechanismConfig.calibrated(name, mu, spec, truncate=truncate)

            def work(i, _start, k, n=n, cfg=cfg, gi=gi, mi=mi):
                rng = rng_for(seed, gi, mi, i)
                tables = rng.multinomial(int(n), pi, size=k).astype(float)
                out = cfg.apply(tables, cfg.draw(rng, k, pi.size))
                return np.sum((out - tables) ** 2, axis=1)

            losses = run_chunks(work, int(reps), threads)
            rows.append({
                "n": int(n),
                "mechanism": cfg.kind.value,
                "mean_cost": float(losses.mean()),
                "std_error": float(losses.std(ddof=1) / math.sqrt(losses.size)),
            })
    return rows
