"""Additive-noise releases, James-Stein post-processing and truncation.

Every release is a deterministic function of ``(theta, config, seed)``.
Batched releases draw all standard noise for a batch from one generator, so
simulations can be chunked without the chunking affecting results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .calibrate import gaussian_sigma, laplace_b_freq, laplace_b_l1, laplace_b_universal
from .errors import ConfigurationError, DataError, DomainError, SingularityError
from .sensitivity import SensitivitySpec

__all__ = [
    "Mechanism",
    "MechanismConfig",
    "ReleaseRecord",
    "rng_for",
    "gaussian_release",
    "rank_deficient_release",
    "js_shrink_zero",
    "js_shrink_avg",
    "rjs_release",
    "laplace_release",
    "truncate",
    "release",
]


class Mechanism(str, enum.Enum):
    Gaussian = "gaussian"
    RankDeficient = "rank"
    JamesSteinZero = "js0"
    JamesSteinAvg = "js"
    RankDeficientJS = "rjs"
    Laplace = "laplace"

    @property
    def is_gaussian_family(self) -> bool:
        return self is not Mechanism.Laplace

    @property
    def uses_basis(self) -> bool:
        return self in (Mechanism.RankDeficient, Mechanism.RankDeficientJS)


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Generator for stream ``key`` under ``seed``.

    Streams with different keys are statistically independent and do not
    depend on the order in which they are created.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _as_vector(theta, name="theta") -> np.ndarray:
    x = np.asarray(theta, dtype=float)
    if x.ndim != 1:
        raise DataError(f"{name} must be a 1-d vector")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{name} contains non-finite values")
    return x


def _pos(name, v):
    v = float(v)
    if not (math.isfinite(v) and v > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {v}")
    return v


def truncate(x) -> np.ndarray:
    """Coordinatewise ``max(0, x)``."""
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def js_shrink_zero(x, sigma: float) -> np.ndarray:
    """Shrink toward the origin: ``(1 - (p-2) sigma^2 / |x|^2) x``.

    ``x`` may be a vector or a batch of row vectors.  The factor is not
    clipped at zero.
    """
    x = np.asarray(x, dtype=float)
    p = x.shape[-1]
    if p < 3:
        raise DomainError("shrinkage toward zero needs p >= 3")
    sq = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(sq == 0.0):
        raise SingularityError("cannot shrink a zero vector")
    return (1.0 - (p - 2) * sigma**2 / sq) * x


def js_shrink_avg(x, sigma: float) -> np.ndarray:
    """Shrink toward the coordinate mean, leaving the mean untouched.

    ``xbar 1 + (1 - (p-3) sigma^2 / |x - xbar 1|^2)(x - xbar 1)``.
    """
    x = np.asarray(x, dtype=float)
    p = x.shape[-1]
    if p < 4:
        raise DomainError("shrinkage toward the mean needs p >= 4")
    xbar = x.mean(axis=-1, keepdims=True)
    xc = x - xbar
    sq = np.sum(xc * xc, axis=-1, keepdims=True)
    if np.any(sq == 0.0):
        raise SingularityError("centred vector is zero; shrinkage factor undefined")
    return xbar + (1.0 - (p - 3) * sigma**2 / sq) * xc


@dataclass(frozen=True, eq=False)
class MechanismConfig:
    """A mechanism together with its noise scale.

    Attributes
    ----------
    kind : Mechanism
    scale : float
        Gaussian standard deviation, or Laplace scale for ``laplace``.
    spec : SensitivitySpec, optional
        Required for ``rank`` and ``rjs`` (supplies the basis).
    truncate : bool
        Clip the release at zero as a final post-processing step.
    """

    kind: Mechanism
    scale: float
    spec: SensitivitySpec | None = None
    truncate: bool = False
    mu: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", Mechanism(self.kind))
        object.__setattr__(self, "scale", _pos("scale", self.scale))
        if self.kind.uses_basis:
            if self.spec is None or self.spec.basis is None:
                raise ConfigurationError(f"{self.kind.value} needs a sensitivity spec with a basis")
            if self.kind is Mechanism.RankDeficientJS and self.spec.d_theta < 4:
                raise ConfigurationError("rjs needs d_theta >= 4")

    @classmethod
    def calibrated(cls, kind, mu: float, spec: SensitivitySpec, truncate: bool = False,
                   laplace_method: str | None = None) -> "MechanismConfig":
        """Configure ``kind`` at the smallest noise giving ``mu``-GDP.

        Gaussian-family mechanisms use ``sigma = delta2 / mu``.  Laplace uses
        the frequency-table scale when ``spec`` describes a frequency table
        and the universal scale otherwise, unless ``laplace_method``
        (``"freq"``, ``"l1"`` or ``"universal"``) says otherwise.
        """
        kind = Mechanism(kind)
        if kind is Mechanism.Laplace:
            method = laplace_method or ("freq" if spec.kind == "frequency" else "universal")
            if method == "freq":
                if spec.kind != "frequency":
                    raise ConfigurationError("the freq Laplace scale only applies to frequency tables")
                scale = laplace_b_freq(mu).scale
            elif method == "l1":
                scale = laplace_b_l1(mu, spec.delta1).scale
            elif method == "universal":
                scale = laplace_b_universal(mu, spec.delta1).scale
            else:
                raise ConfigurationError(f"unknown Laplace method {method!r}")
        else:
            scale = gaussian_sigma(mu, spec.delta2).scale
        return cls(kind, scale, spec, truncate, float(mu))

    def noise_dim(self, p: int) -> int:
        return self.spec.d_theta if self.kind.uses_basis else p

    def check_dim(self, p: int) -> None:
        if self.spec is not None and self.spec.p != p:
            raise DataError(f"theta has length {p}, spec expects {self.spec.p}")
        if self.kind is Mechanism.JamesSteinZero and p < 3:
            raise ConfigurationError("js0 needs p >= 3")
        if self.kind is Mechanism.JamesSteinAvg and p < 4:
            raise ConfigurationError("js needs p >= 4")

    def draw(self, rng: np.random.Generator, n: int, p: int) -> np.ndarray:
        """Standard noise for ``n`` releases of a length-``p`` statistic."""
        d = self.noise_dim(p)
        if self.kind is Mechanism.Laplace:
            return rng.laplace(0.0, 1.0, size=(n, d))
        return rng.standard_normal((n, d))

    def apply(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Map standard noise ``z`` (one row per release) to releases."""
        s = self.scale
        k = self.kind
        if k is Mechanism.Laplace or k is Mechanism.Gaussian:
            out = theta + s * z
        elif k is Mechanism.JamesSteinZero:
            out = js_shrink_zero(theta + s * z, s)
        elif k is Mechanism.JamesSteinAvg:
            out = js_shrink_avg(theta + s * z, s)
        else:
            u = self.spec.basis
            coords = theta @ u + s * z
            if k is Mechanism.RankDeficient:
                out = theta + s * (z @ u.T)
            else:
                fixed = theta - (theta @ u) @ u.T
                out = fixed + js_shrink_avg(coords, s) @ u.T
        return truncate(out) if self.truncate else out

    def release_batch(self, theta, rng: np.random.Generator, n: int) -> np.ndarray:
        theta = _as_vector(theta)
        self.check_dim(theta.size)
        return self.apply(theta, self.draw(rng, int(n), theta.size))

    def to_dict(self) -> dict:
        d = {
            "mechanism": self.kind.value,
            "scale": self.scale,
            "truncate": self.truncate,
        }
        if self.mu is not None:
            d["mu"] = self.mu
        if self.spec is not None:
            d["sensitivity"] = self.spec.to_dict()
        return d


@dataclass(frozen=True, eq=False)
class ReleaseRecord:
    """A single release plus what is needed to reproduce it."""

    input_dim: int
    mechanism: Mechanism
    scale: float
    seed: int
    output: np.ndarray
    truncate: bool = False

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "mechanism": self.mechanism.value,
            "scale": self.scale,
            "seed": self.seed,
            "truncate": self.truncate,
            "output": self.output.tolist(),
        }


def release(config: MechanismConfig, theta, seed: int) -> ReleaseRecord:
    """One release of ``theta`` under ``config``, keyed by ``seed``."""
    theta = _as_vector(theta)
    out = config.release_batch(theta, rng_for(seed), 1)[0]
    return ReleaseRecord(theta.size, config.kind, config.scale, int(seed), out, config.truncate)


def gaussian_release(theta, sigma: float, seed: int) -> np.ndarray:
    """``theta + sigma z`` with ``z`` standard normal."""
    return release(MechanismConfig(Mechanism.Gaussian, sigma), theta, seed).output


def rank_deficient_release(theta, spec: SensitivitySpec, sigma: float, seed: int) -> np.ndarray:
    """``theta + sigma U z``: noise confined to the span of the basis ``U``."""
    return release(MechanismConfig(Mechanism.RankDeficient, sigma, spec), theta, seed).output


def rjs_release(theta, spec: SensitivitySpec, sigma: float, seed: int) -> np.ndarray:
    """Rank-deficient release followed by mean-targeted shrinkage in basis
    coordinates; the component orthogonal to the basis is left exact."""
    return release(MechanismConfig(Mechanism.RankDeficientJS, sigma, spec), theta, seed).output


def laplace_release(theta, b: float, seed: int) -> np.ndarray:
    """``theta`` plus independent Laplace(0, b) noise per coordinate."""
    return release(MechanismConfig(Mechanism.Laplace, b), theta, seed).output
