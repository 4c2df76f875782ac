"""Orthonormal parity basis for an arbitrary distribution on {-1,1}^d.

When the coordinates are correlated the standardized parities stop being
orthogonal. Running Gram-Schmidt over them in the canonical subset order gives
an orthonormal basis of L2(D) whose non-trivial members are in one-to-one
correspondence with the support points of D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSourceError, ShapeError
from .fourier import (
    TruthTable,
    _frozen,
    clean_pmf,
    dimension_of,
    parity_matrix,
    point_signs,
)

TRIVIAL_NORM = 1e-9
SIGMA_TOL = 1e-12


@dataclass(frozen=True)
class GeneralSourceSpec:
    """Dense pmf over {-1,1}^d, indexed like a TruthTable."""

    pmf: np.ndarray
    mu: np.ndarray = field(init=False)
    sigma: np.ndarray = field(init=False)

    def __post_init__(self):
        pmf = clean_pmf(self.pmf)
        if pmf.ndim != 1:
            raise InvalidSourceError("pmf must be a flat array of length 2^d")
        d = dimension_of(pmf.shape[0])
        mu = pmf @ point_signs(d)
        # coordinates are +-1, so the variance is 1 - mu^2
        sigma = np.sqrt(np.clip(1.0 - mu**2, 0.0, None))
        bad = np.flatnonzero(sigma <= SIGMA_TOL)
        if bad.size:
            raise InvalidSourceError(
                f"coordinate {int(bad[0]) + 1} is deterministic (sigma = 0)"
            )
        object.__setattr__(self, "pmf", _frozen(pmf))
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "sigma", _frozen(sigma))

    @property
    def d(self) -> int:
        return dimension_of(self.pmf.shape[0])

    @property
    def support(self) -> np.ndarray:
        return self.pmf > 0

    def inner(self, a, b) -> float:
        return float(np.sum(self.pmf * a * b))


@dataclass(frozen=True)
class OrthonormalBasis:
    d: int
    matrix: np.ndarray  # row i is psi_{S_i}
    trivial_flags: np.ndarray

    @property
    def functions(self) -> list[TruthTable]:
        return [TruthTable(row) for row in self.matrix]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(~self.trivial_flags))


def subset_order(d: int) -> list[int]:
    """Canonical order of subsets of [d] as bitmasks: {}, {1}, {2}, {1,2}, {3}, ..."""
    if d < 0:
        raise ShapeError("dimension must be non-negative")
    return list(range(1 << d))


def gram_schmidt(src: GeneralSourceSpec) -> OrthonormalBasis:
    d = src.d
    w = src.pmf
    phi = parity_matrix(d, src.mu, src.sigma)
    n = 1 << d
    psi = np.zeros((n, n))
    trivial = np.zeros(n, dtype=bool)
    passes = 2 if d >= 4 else 1
    for i in subset_order(d):
        v = phi[i].copy()
        for _ in range(passes):
            for j in range(i):
                if not trivial[j]:
                    v -= np.sum(w * psi[j] * v) * psi[j]
        norm = np.sqrt(np.sum(w * v * v))
        if norm > TRIVIAL_NORM:
            psi[i] = v / norm
        else:
            trivial[i] = True
    return OrthonormalBasis(d, _frozen(psi), _frozen(trivial))


def gram_residual(basis: OrthonormalBasis, src: GeneralSourceSpec) -> float:
    """Max-norm distance of the basis Gram matrix from the ideal 0/1 diagonal."""
    psi = basis.matrix
    gram = (psi * src.pmf[None, :]) @ psi.T
    ideal = np.diag((~basis.trivial_flags).astype(float))
    return float(np.max(np.abs(gram - ideal)))


def expand(g: TruthTable, src: GeneralSourceSpec, basis: OrthonormalBasis) -> np.ndarray:
    if g.d != src.d or basis.d != src.d:
        raise ShapeError(f"dimension mismatch: table d={g.d}, source d={src.d}, basis d={basis.d}")
    return basis.matrix @ (src.pmf * np.asarray(g.values, dtype=float))


def reconstruct(coeffs, basis: OrthonormalBasis) -> TruthTable:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.matrix.shape[0],):
        raise ShapeError(f"expected {basis.matrix.shape[0]} coefficients, got shape {coeffs.shape}")
    return TruthTable(basis.matrix.T @ coeffs)
