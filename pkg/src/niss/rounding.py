"""Correlation-preserving randomized rounding of real-valued function families.

A family holds one table f_u per non-reserved symbol u = 1..k-1 with values
in [-1, 1]. At a point x the rounded output is u with probability
r_u(x) = (1 + f_u(x)) / 2 and the reserved symbol 0 with the remaining mass,
drawn as a single categorical sample. The two parties round with independent
randomness.

The categorical draw is deliberate: rounding symbol by symbol with independent
binary coins, each succeeding with probability (1 + f_u)/2 and stopping at the
first success, puts mass r_u * prod_{u' < u} (1 - r_u') on u, which does not
preserve means once k > 2. For k = 2 the two schemes coincide.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import TargetSpec, e_from_q
from .errors import ArgumentError, ConstraintError, ShapeError
from .fourier import BinarySourceSpec, _frozen, dimension_of, product_weights

FAMILY_TOL = 1e-12


@dataclass(frozen=True)
class RealFunctionFamily:
    """Tables f_1..f_{k-1}; ``tables[u-1]`` is f_u over the 2^d points."""

    tables: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tables, dtype=float)
        if t.ndim != 2 or t.shape[0] < 1:
            raise ShapeError("a family needs a (k-1, 2^d) array with k >= 2")
        dimension_of(t.shape[1])
        object.__setattr__(self, "tables", _frozen(t))

    @property
    def k(self) -> int:
        return self.tables.shape[0] + 1

    @property
    def d(self) -> int:
        return dimension_of(self.tables.shape[1])

    @classmethod
    def from_symbols(cls, values, k: int) -> "RealFunctionFamily":
        """Indicator lifts chi(f = u), u = 1..k-1, of a deterministic k-ary table."""
        vals = np.asarray(values)
        return cls(np.where(vals[None, :] == np.arange(1, k)[:, None], 1.0, -1.0))

    @classmethod
    def constant(cls, probs, d: int) -> "RealFunctionFamily":
        """Family whose rounding emits u >= 1 with probability probs[u-1] everywhere."""
        probs = np.asarray(probs, dtype=float)
        return cls(np.repeat((2.0 * probs - 1.0)[:, None], 1 << d, axis=1))


@dataclass(frozen=True)
class Violation:
    item: str  # "iv" (|f_u| <= 1) or "v" (sum over A of f_u <= 2 - |A|)
    x: int
    u: int | None = None
    A: tuple[int, ...] | None = None
    amount: float = 0.0

    def describe(self) -> str:
        if self.item == "iv":
            return f"item iv violated: |f_{self.u}(x={self.x})| exceeds 1 by {self.amount:.3g}"
        return f"item v violated at x={self.x} for A={set(self.A)}: excess {self.amount:.3g}"


@dataclass(frozen=True)
class ValidationReport:
    bounded: bool
    subadditive: bool
    first_violation: Violation | None

    @property
    def ok(self) -> bool:
        return self.bounded and self.subadditive


def validate_family(fam: RealFunctionFamily, tol: float = FAMILY_TOL) -> ValidationReport:
    t = fam.tables
    over = np.abs(t) - 1.0
    bad_iv = over > tol
    first = None
    if bad_iv.any():
        # scan in point order, then symbol order
        x = int(np.flatnonzero(bad_iv.any(axis=0))[0])
        u = int(np.flatnonzero(bad_iv[:, x])[0]) + 1
        first = Violation("iv", x=x, u=u, amount=float(over[u - 1, x]))
    # With |f_u| <= 1 every r_u >= 0, so the binding subset is {u : r_u > 0}.
    r = (1.0 + t) / 2.0
    excess = np.sum(np.clip(r, 0.0, None), axis=0) - 1.0
    bad_v = excess > tol
    if bad_v.any() and first is None:
        x = int(np.flatnonzero(bad_v)[0])
        A = tuple(int(u) + 1 for u in np.flatnonzero(r[:, x] > 0))
        first = Violation("v", x=x, A=A, amount=float(2.0 * excess[x]))
    return ValidationReport(not bad_iv.any(), not bad_v.any(), first)


def _require_valid(fam: RealFunctionFamily) -> None:
    rep = validate_family(fam)
    if not rep.ok:
        raise ConstraintError(rep.first_violation.describe())


def profile_matrix(fam: RealFunctionFamily) -> np.ndarray:
    """(k, 2^d) array of rounding probabilities; row 0 is the reserved symbol."""
    r = np.clip((1.0 + fam.tables) / 2.0, 0.0, 1.0)
    r0 = np.clip(1.0 - r.sum(axis=0), 0.0, 1.0)
    return np.vstack([r0, r])


def probability_profile(fam: RealFunctionFamily, x: int) -> np.ndarray:
    _require_valid(fam)
    if not 0 <= x < fam.tables.shape[1]:
        raise ArgumentError(f"point {x} out of range")
    return profile_matrix(fam)[:, x]


def _categorical(cum: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-cdf draw; ``cum`` is (k, n) cumulative, one column per sample."""
    out = np.sum(uniforms[None, :] >= cum[:-1], axis=0)
    return out


def round_sample(fam: RealFunctionFamily, x: int, rng: np.random.Generator) -> int:
    probs = probability_profile(fam, x)
    return int(_categorical(np.cumsum(probs)[:, None], rng.random(1))[0])


def generated_distribution_exact(
    fam_f: RealFunctionFamily, fam_g: RealFunctionFamily, src: BinarySourceSpec
) -> TargetSpec:
    if fam_f.d != fam_g.d:
        raise ShapeError(f"dimension mismatch: {fam_f.d} vs {fam_g.d}")
    _require_valid(fam_f)
    _require_valid(fam_g)
    R, S = profile_matrix(fam_f), profile_matrix(fam_g)
    return TargetSpec(R @ src.joint_weights(fam_f.d) @ S.T)


@dataclass(frozen=True)
class EmpiricalDistribution:
    target: TargetSpec
    stderr: np.ndarray
    n_samples: int
    seed: int
    jobs: int


def _split(n: int, jobs: int) -> list[int]:
    base, extra = divmod(n, jobs)
    return [base + (1 if i < extra else 0) for i in range(jobs)]


def _mc_worker(args) -> np.ndarray:
    R_cum, S_cum, src_cdf, d, n, seed, worker = args
    src_rng, alice, bob = (np.random.default_rng(s) for s in np.random.SeedSequence([seed, worker]).spawn(3))
    counts = np.zeros((R_cum.shape[0], S_cum.shape[0]), dtype=np.int64)
    chunk = 1 << 18
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        # each letter pair (x_i, y_i) drawn from the 4-cell single-letter pmf, cell = 2a + b
        cells = np.searchsorted(src_cdf, src_rng.random((m, d)), side="right")
        cells = np.minimum(cells, 3)
        xbits, ybits = cells >> 1, cells & 1
        weights = 1 << np.arange(d)
        xi, yi = xbits @ weights, ybits @ weights
        u = _categorical(R_cum[:, xi], alice.random(m))
        v = _categorical(S_cum[:, yi], bob.random(m))
        np.add.at(counts, (u, v), 1)
    return counts


def generated_distribution_mc(
    fam_f: RealFunctionFamily,
    fam_g: RealFunctionFamily,
    src: BinarySourceSpec,
    n_samples: int,
    seed: int = 0,
    jobs: int = 1,
) -> EmpiricalDistribution:
    """Simulate the rounding; results depend on (seed, jobs) and nothing else."""
    if n_samples < 1:
        raise ArgumentError("n_samples must be at least 1")
    if jobs < 1:
        raise ArgumentError("jobs must be at least 1")
    if fam_f.d != fam_g.d:
        raise ShapeError(f"dimension mismatch: {fam_f.d} vs {fam_g.d}")
    _require_valid(fam_f)
    _require_valid(fam_g)
    R_cum = np.cumsum(profile_matrix(fam_f), axis=0)
    S_cum = np.cumsum(profile_matrix(fam_g), axis=0)
    src_cdf = np.cumsum(src.pmf.ravel())
    tasks = [
        (R_cum, S_cum, src_cdf, fam_f.d, n, seed, w)
        for w, n in enumerate(_split(n_samples, jobs))
    ]
    if jobs == 1:
        parts = [_mc_worker(tasks[0])]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_mc_worker, tasks))
    counts = np.sum(parts, axis=0)
    q = counts / n_samples
    stderr = np.sqrt(q * (1.0 - q) / n_samples)
    return EmpiricalDistribution(TargetSpec(q), stderr, n_samples, seed, jobs)


@dataclass(frozen=True)
class PreservationReport:
    mean_f_error: float
    mean_g_error: float
    correlation_error: float
    target: TargetSpec

    @property
    def max_error(self) -> float:
        return max(self.mean_f_error, self.mean_g_error, self.correlation_error)


def preservation_check(
    fam_f: RealFunctionFamily, fam_g: RealFunctionFamily, src: BinarySourceSpec
) -> PreservationReport:
    """Compare rounded-indicator moments (read off the generated Q) with family moments."""
    d = fam_f.d
    Q = generated_distribution_exact(fam_f, fam_g, src)
    wx = product_weights(src.p_x, d)
    wy = product_weights(src.p_y, d)
    mean_f = fam_f.tables @ wx
    mean_g = fam_g.tables @ wy
    corr = fam_f.tables @ src.joint_weights(d) @ fam_g.tables.T
    return PreservationReport(
        mean_f_error=float(np.max(np.abs(2.0 * Q.q_u[1:] - 1.0 - mean_f))),
        mean_g_error=float(np.max(np.abs(2.0 * Q.q_v[1:] - 1.0 - mean_g))),
        correlation_error=float(np.max(np.abs(e_from_q(Q).e - corr))),
        target=Q,
    )
