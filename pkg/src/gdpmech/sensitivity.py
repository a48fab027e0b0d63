"""Sensitivity specifications and orthonormal bases of the sensitivity span."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "SensitivitySpec",
    "frequency_table_spec",
    "bounded_mean_spec",
    "custom_spec",
    "helmert_basis",
    "centering_projection",
]

_ORTHO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SensitivitySpec:
    """L1/L2 sensitivities of a p-dimensional statistic and its span.

    Attributes
    ----------
    p : int
        Dimension of the statistic.
    delta1, delta2 : float
        L1 and L2 sensitivities; ``delta1 >= delta2 > 0``.
    d_theta : int
        Dimension of the span of all neighbour differences.
    basis : ndarray or None
        ``(p, d_theta)`` matrix with orthonormal columns spanning that
        space, or ``None`` when ``d_theta == p``.
    kind : str
        Label used in sidecars (``"frequency"``, ``"mean"``, ``"custom"``).
    """

    p: int
    delta1: float
    delta2: float
    d_theta: int
    basis: np.ndarray | None = None
    kind: str = "custom"

    def __post_init__(self):
        p, d = int(self.p), int(self.d_theta)
        if p < 1:
            raise DomainError("p must be >= 1")
        if not (1 <= d <= p):
            raise DomainError(f"d_theta must lie in [1, p], got {d}")
        d1, d2 = float(self.delta1), float(self.delta2)
        if not (math.isfinite(d1) and math.isfinite(d2) and d2 > 0.0):
            raise DomainError("sensitivities must be positive and finite")
        if d1 < d2 * (1.0 - 1e-12):
            raise DomainError("delta1 must be at least delta2")
        basis = self.basis
        if basis is not None:
            basis = np.array(basis, dtype=float)
            if basis.shape != (p, d):
                raise DomainError(f"basis must have shape ({p}, {d}), got {basis.shape}")
            gram = basis.T @ basis
            if np.max(np.abs(gram - np.eye(d))) > _ORTHO_TOL * max(1, d):
                raise DomainError("basis columns are not orthonormal")
            basis.setflags(write=False)
        elif d < p:
            raise DomainError("a basis is required when d_theta < p")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "d_theta", d)
        object.__setattr__(self, "delta1", d1)
        object.__setattr__(self, "delta2", d2)
        object.__setattr__(self, "basis", basis)

    @property
    def rank_deficient(self) -> bool:
        return self.d_theta < self.p

    def with_basis(self, basis) -> "SensitivitySpec":
        """Replace the basis by another orthonormal basis of the same span.

        For frequency tables the new basis must still contain every
        difference ``e_i - e_j``, i.e. be orthogonal to the all-ones vector.
        """
        out = SensitivitySpec(self.p, self.delta1, self.delta2, self.d_theta, basis, self.kind)
        if self.basis is not None:
            # same span iff the projections agree
            if not np.allclose(out.basis @ out.basis.T, self.basis @ self.basis.T, atol=1e-10):
                raise DomainError("override basis spans a different subspace")
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "d_theta": self.d_theta,
        }


def helmert_basis(p: int) -> np.ndarray:
    """``(p, p-1)`` Helmert sub-matrix.

    Column ``k-1`` (for ``k = 2..p``) is ``(1, ..., 1, 1-k, 0, ..., 0)``
    scaled by ``1/sqrt(k(k-1))``; columns are orthonormal and sum to zero.
    """
    p = int(p)
    if p < 2:
        raise DomainError("helmert_basis needs p >= 2")
    h = np.zeros((p, p - 1))
    for k in range(2, p + 1):
        col = h[:, k - 2]
        col[: k - 1] = 1.0
        col[k - 1] = 1.0 - k
        col /= math.sqrt(k * (k - 1.0))
    return h


def centering_projection(p: int) -> np.ndarray:
    """``I - 11^T/p``, the orthogonal projector onto the zero-sum hyperplane."""
    p = int(p)
    if p < 1:
        raise DomainError("p must be >= 1")
    return np.eye(p) - np.full((p, p), 1.0 / p)


def frequency_table_spec(p: int) -> SensitivitySpec:
    """Counts over ``p`` cells; neighbours move one record between cells."""
    p = int(p)
    if p < 2:
        raise DomainError("a frequency table needs p >= 2 cells")
    return SensitivitySpec(p, 2.0, math.sqrt(2.0), p - 1, helmert_basis(p), kind="frequency")


def bounded_mean_spec(p: int, n: int) -> SensitivitySpec:
    """Mean of ``n`` records in ``[0, 1]^p``: ``delta_r = p^(1/r)/n``."""
    p, n = int(p), int(n)
    if p < 1 or n < 1:
        raise DomainError("p and n must be >= 1")
    return SensitivitySpec(p, p / n, math.sqrt(p) / n, p, None, kind="mean")


def custom_spec(p: int, delta1: float, delta2: float, d_theta: int | None = None,
                basis=None) -> SensitivitySpec:
    """User-declared sensitivities.

    Nothing here can verify that the stated values are correct for the
    statistic in question; that responsibility stays with the caller.
    """
    d = int(p) if d_theta is None else int(d_theta)
    return SensitivitySpec(int(p), delta1, delta2, d, basis, kind="custom")
