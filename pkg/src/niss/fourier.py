"""Fourier expansion on the biased Boolean cube.

Points of {-1,1}^d are addressed by integers: bit j of the index is set iff
coordinate x_{j+1} = +1. Subsets of [d] are bitmasks in the same way (bit j
set iff j+1 is in S), so ascending masks give the canonical subset order
0 = {}, 1 = {1}, 2 = {2}, 3 = {1,2}, 4 = {3}, ...

All spectra here are dense arrays of length 2^d and are computed by direct
weighted summation against the parity matrix, O(4^d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import AlphabetError, InvalidSourceError, RangeError, ShapeError

SUM_TOL = 1e-12
NEG_TOL = 1e-15


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def clean_pmf(pmf, what: str = "pmf") -> np.ndarray:
    """Validate a probability array and clamp round-off negatives to zero."""
    arr = np.asarray(pmf, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidSourceError(f"{what} has non-finite entries")
    if np.any(arr < -NEG_TOL):
        raise InvalidSourceError(f"{what} has a negative entry ({float(arr.min())!r})")
    arr = np.where(arr < 0, 0.0, arr)
    total = arr.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidSourceError(f"{what} sums to {float(total)!r}, not 1")
    return arr


def dimension_of(n: int) -> int:
    d = n.bit_length() - 1
    if n < 1 or (1 << d) != n:
        raise ShapeError(f"table length {n} is not a power of two")
    return d


@lru_cache(maxsize=None)
def point_signs(d: int) -> np.ndarray:
    """(2^d, d) array whose row i lists the coordinates of point i in {-1,+1}."""
    idx = np.arange(1 << d)[:, None]
    bits = (idx >> np.arange(d)[None, :]) & 1
    return _frozen(2.0 * bits - 1.0)


@lru_cache(maxsize=None)
def subset_sizes(d: int) -> np.ndarray:
    masks = np.arange(1 << d)
    sizes = np.zeros(1 << d, dtype=np.int64)
    for j in range(d):
        sizes += (masks >> j) & 1
    return _frozen(sizes)


def subset_label(mask: int) -> str:
    members = [str(j + 1) for j in range(mask.bit_length()) if (mask >> j) & 1]
    return "{" + ",".join(members) + "}"


def parity_matrix(d: int, mu, sigma) -> np.ndarray:
    """Matrix M with M[S, x] = prod_{j in S} (x_j - mu_j) / sigma_j.

    ``mu`` and ``sigma`` may be scalars (i.i.d. coordinates) or length-d
    arrays (one mean / deviation per coordinate).
    """
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (d,))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (d,))
    if np.any(sigma <= 0):
        raise InvalidSourceError("parities need strictly positive standard deviations")
    z = (point_signs(d) - mu[None, :]) / sigma[None, :]  # (x, j)
    n = 1 << d
    m = np.ones((n, n))
    for j in range(d):
        has_j = ((np.arange(n) >> j) & 1).astype(bool)
        m[has_j, :] *= z[:, j][None, :]
    return m


def bernoulli_moments(p: float) -> tuple[float, float]:
    """Mean and standard deviation of a {-1,1} variable with P(+1) = p."""
    if not 0.0 < p < 1.0:
        raise InvalidSourceError(f"Bernoulli parameter must lie in (0,1), got {p!r}")
    return 2.0 * p - 1.0, 2.0 * math.sqrt(p * (1.0 - p))


def product_weights(p: float, d: int) -> np.ndarray:
    """Probability of every point of {-1,1}^d under the i.i.d. Bernoulli(p) measure."""
    w = np.ones(1)
    single = np.array([1.0 - p, p])
    for _ in range(d):
        w = np.kron(single, w)
    return w


@dataclass(frozen=True)
class BinarySourceSpec:
    """Single-letter joint pmf of (X, Y) on {-1,1}^2.

    ``pmf[a, b]`` is P(X = 2a-1, Y = 2b-1), so row/column 0 is the symbol -1.
    """

    pmf: np.ndarray
    mu_x: float = field(init=False)
    mu_y: float = field(init=False)
    sigma_x: float = field(init=False)
    sigma_y: float = field(init=False)
    rho: float = field(init=False)

    def __post_init__(self):
        if np.shape(self.pmf) != (2, 2):
            raise InvalidSourceError(f"source pmf must be 2x2, got shape {np.shape(self.pmf)}")
        pmf = clean_pmf(self.pmf, "source pmf")
        px, py = pmf[1, :].sum(), pmf[:, 1].sum()
        if not (0.0 < px < 1.0 and 0.0 < py < 1.0):
            raise InvalidSourceError("source marginals must be non-degenerate")
        mu_x, sigma_x = bernoulli_moments(px)
        mu_y, sigma_y = bernoulli_moments(py)
        signs = np.array([-1.0, 1.0])
        cov = np.sum(pmf * np.outer(signs - mu_x, signs - mu_y))
        rho = float(np.clip(cov / (sigma_x * sigma_y), -1.0, 1.0))
        object.__setattr__(self, "pmf", _frozen(pmf))
        object.__setattr__(self, "mu_x", mu_x)
        object.__setattr__(self, "mu_y", mu_y)
        object.__setattr__(self, "sigma_x", sigma_x)
        object.__setattr__(self, "sigma_y", sigma_y)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def dsbs(cls, eps: float) -> "BinarySourceSpec":
        """Doubly symmetric binary source: uniform marginals, P(X != Y) = eps."""
        if not 0.0 <= eps <= 1.0:
            raise RangeError(f"crossover probability must lie in [0,1], got {eps!r}")
        return cls(np.array([[1.0 - eps, eps], [eps, 1.0 - eps]]) / 2.0)

    @classmethod
    def independent(cls, px: float, py: float) -> "BinarySourceSpec":
        return cls(np.outer([1.0 - px, px], [1.0 - py, py]))

    @property
    def p_x(self) -> float:
        return float(self.pmf[1, :].sum())

    @property
    def p_y(self) -> float:
        return float(self.pmf[:, 1].sum())

    def joint_weights(self, d: int) -> np.ndarray:
        """(2^d, 2^d) matrix of P^{(x)d}(x, y) over point indices."""
        w = np.ones((1, 1))
        for _ in range(d):
            w = np.kron(self.pmf, w)
        return w


@dataclass(frozen=True)
class TruthTable:
    """Dense table of a function on {-1,1}^d, indexed by point bitmask."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise ShapeError("truth table values must be one-dimensional")
        dimension_of(vals.shape[0])
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def d(self) -> int:
        return dimension_of(self.values.shape[0])

    def is_sign_valued(self) -> bool:
        return bool(np.all((self.values == 1) | (self.values == -1)))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FourierSpectrum:
    """Fourier coefficients indexed by subset bitmask, w.r.t. Bernoulli(p)."""

    coeffs: np.ndarray
    p: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1:
            raise ShapeError("spectrum must be one-dimensional")
        dimension_of(c.shape[0])
        bernoulli_moments(self.p)
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def d(self) -> int:
        return dimension_of(self.coeffs.shape[0])

    def labelled(self) -> dict[str, float]:
        return {subset_label(s): float(c) for s, c in enumerate(self.coeffs)}


def parity(S: int, x: int, mu: float, sigma: float, d: int) -> float:
    """Value of the standardized parity of subset ``S`` at point ``x``."""
    if sigma <= 0:
        raise InvalidSourceError(f"sigma must be positive, got {sigma!r}")
    n = 1 << d
    if not (0 <= S < n and 0 <= x < n):
        raise RangeError(f"subset {S} / point {x} out of range for d={d}")
    out = 1.0
    for j in range(d):
        if (S >> j) & 1:
            xj = 1.0 if (x >> j) & 1 else -1.0
            out *= (xj - mu) / sigma
    return out


def analyze(f: TruthTable, p: float) -> FourierSpectrum:
    mu, sigma = bernoulli_moments(p)
    d = f.d
    vals = np.asarray(f.values, dtype=float)
    coeffs = parity_matrix(d, mu, sigma) @ (product_weights(p, d) * vals)
    return FourierSpectrum(coeffs, p)


def synthesize(spec: FourierSpectrum, p: float | None = None) -> TruthTable:
    """Evaluate sum_S coeffs[S] * phi_S at every point.

    ``p`` defaults to the parameter the spectrum was computed under; passing a
    different one is refused rather than silently reinterpreting the basis.
    """
    if p is None:
        p = spec.p
    mu, sigma = bernoulli_moments(p)
    if p != spec.p:
        raise ShapeError(f"spectrum was computed under p={spec.p!r}, not p={p!r}")
    return TruthTable(parity_matrix(spec.d, mu, sigma).T @ spec.coeffs)


def cross_correlation(fs: FourierSpectrum, gs: FourierSpectrum, rho: float) -> float:
    """E[f(X^d) g(Y^d)] from the two spectra and the per-letter correlation.

    ``fs`` must be taken w.r.t. the X marginal and ``gs`` w.r.t. the Y marginal.
    """
    if fs.d != gs.d:
        raise ShapeError(f"dimension mismatch: {fs.d} vs {gs.d}")
    if abs(rho) > 1.0:
        raise RangeError(f"|rho| must not exceed 1, got {rho!r}")
    decay = float(rho) ** subset_sizes(fs.d)
    return float(np.sum(fs.coeffs * gs.coeffs * decay))


def disagreement_probability(efg: float) -> float:
    if not -1.0 - 1e-9 <= efg <= 1.0 + 1e-9:
        raise RangeError(f"E[fg] of sign-valued functions lies in [-1,1], got {efg!r}")
    return (1.0 - efg) / 2.0


def check_symbols(values, k: int | None = None) -> np.ndarray:
    """Return ``values`` as an int array, raising unless all are in {0..k-1}."""
    vals = np.asarray(values)
    as_int = np.rint(vals.astype(float)).astype(np.int64)
    if np.any(as_int != vals) or np.any(as_int < 0):
        raise AlphabetError("output symbols must be non-negative integers")
    if k is not None and np.any(as_int >= k):
        raise AlphabetError(f"output symbol {int(as_int.max())} outside alphabet of size {k}")
    return as_int


def indicator_lift(f: TruthTable, u: int, k: int | None = None) -> TruthTable:
    """Sign-valued table chi(f(x) = u) = 2*1(f(x)=u) - 1."""
    vals = check_symbols(f.values, k)
    if u < 0 or (k is not None and u >= k):
        raise AlphabetError(f"symbol {u} outside alphabet")
    return TruthTable(np.where(vals == u, 1.0, -1.0))


def pearson_rho(src: BinarySourceSpec) -> float:
    return src.rho
