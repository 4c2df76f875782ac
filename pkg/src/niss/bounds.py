"""Feasibility geometry for fixed output marginals.

Symbols 0 of both output alphabets are reserved; everything is expressed in
the correlation coordinates

    e[u, v] = E[chi(U=u) chi(V=v)] = 4 Q(u,v) - 2 Q_U(u) - 2 Q_V(v) + 1

for u, v >= 1. At fixed marginals this is an affine bijection with Q.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import itertools
import math

import numpy as np
from scipy.optimize import linprog

from .errors import ArgumentError, InfeasibleError, RangeError, ShapeError, SizeError
from .fourier import _frozen, clean_pmf

DEFAULT_TOL = 1e-9
E_TOL = 1e-9
MAX_POLYTOPE_BITS = 20
DEFAULT_GRID_CAP = 100_000


@dataclass(frozen=True)
class TargetSpec:
    """Joint pmf Q(u, v) on {0..ku-1} x {0..kv-1}."""

    q: np.ndarray
    q_u: np.ndarray = field(init=False)
    q_v: np.ndarray = field(init=False)

    def __post_init__(self):
        q = clean_pmf(self.q, "target pmf")
        if q.ndim != 2 or min(q.shape) < 2:
            raise ShapeError(f"target pmf must be a ku x kv matrix with ku, kv >= 2, got shape {q.shape}")
        object.__setattr__(self, "q", _frozen(q))
        object.__setattr__(self, "q_u", _frozen(q.sum(axis=1)))
        object.__setattr__(self, "q_v", _frozen(q.sum(axis=0)))

    @property
    def ku(self) -> int:
        return self.q.shape[0]

    @property
    def kv(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class CorrelationVector:
    """Matrix e[u-1, v-1] for u in {1..ku-1}, v in {1..kv-1}."""

    e: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        if e.ndim != 2 or 0 in e.shape:
            raise ShapeError(f"correlation vector must be a non-empty matrix, got shape {e.shape}")
        if np.any(np.abs(e) > 1.0 + E_TOL):
            raise RangeError("correlation coordinates must lie in [-1, 1]")
        object.__setattr__(self, "e", _frozen(e))

    @property
    def ku(self) -> int:
        return self.e.shape[0] + 1

    @property
    def kv(self) -> int:
        return self.e.shape[1] + 1


@dataclass(frozen=True)
class LambdaWeights:
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 2 or 0 in lam.shape:
            raise ShapeError(f"lambda must be a non-empty matrix, got shape {lam.shape}")
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
            raise ArgumentError("lambda weights must be non-negative and sum to 1")
        object.__setattr__(self, "lam", _frozen(lam))

    @property
    def ku(self) -> int:
        return self.lam.shape[0] + 1

    @property
    def kv(self) -> int:
        return self.lam.shape[1] + 1


@dataclass(frozen=True)
class BoundReport:
    theta_phi: float
    theta_rho: float
    theta_rho2_1: float
    theta_rho2_2: float
    theta_rho2_3: float
    theta_minus: float
    theta_plus: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _marginal(q, what: str) -> np.ndarray:
    q = clean_pmf(q, what)
    if q.ndim != 1 or q.shape[0] < 2:
        raise ShapeError(f"{what} must be a vector over at least 2 symbols")
    return q


def e_from_q(t: TargetSpec) -> CorrelationVector:
    e = 4.0 * t.q[1:, 1:] - 2.0 * t.q_u[1:, None] - 2.0 * t.q_v[None, 1:] + 1.0
    return CorrelationVector(e)


def q_from_e(e: CorrelationVector, qU, qV) -> TargetSpec:
    qU, qV = _marginal(qU, "Q_U"), _marginal(qV, "Q_V")
    if (qU.shape[0], qV.shape[0]) != (e.ku, e.kv):
        raise ShapeError(f"marginal sizes {qU.shape[0]}x{qV.shape[0]} do not match e of {e.ku}x{e.kv}")
    q = np.empty((e.ku, e.kv))
    q[1:, 1:] = (e.e + 2.0 * qU[1:, None] + 2.0 * qV[None, 1:] - 1.0) / 4.0
    q[1:, 0] = qU[1:] - q[1:, 1:].sum(axis=1)
    q[0, 1:] = qV[1:] - q[1:, 1:].sum(axis=0)
    q[0, 0] = qU[0] - q[0, 1:].sum()
    if np.any(q < -E_TOL) or np.any(q > 1.0 + E_TOL):
        u, v = np.unravel_index(np.argmin(np.minimum(q, 1.0 - q)), q.shape)
        raise InfeasibleError(
            f"e is inconsistent with the marginals: implied Q({u},{v}) = {q[u, v]!r}"
        )
    q = np.clip(q, 0.0, 1.0)
    return TargetSpec(q)


def base_point(qU, qV) -> CorrelationVector:
    """e-coordinates of the product coupling Q_U x Q_V."""
    qU, qV = _marginal(qU, "Q_U"), _marginal(qV, "Q_V")
    return CorrelationVector(np.outer(2.0 * qU[1:] - 1.0, 2.0 * qV[1:] - 1.0))


def _as_members(S, k: int, side: str) -> np.ndarray:
    mask = np.zeros(k - 1, dtype=bool)
    for s in S:
        if not (isinstance(s, (int, np.integer)) and 1 <= s <= k - 1):
            raise ArgumentError(f"{side} member {s!r} outside {{1..{k - 1}}}")
        mask[s - 1] = True
    return mask


def inner_vertex(t: TargetSpec, A, B) -> CorrelationVector:
    """Couple like ``t`` on A x B and like the product elsewhere."""
    a = _as_members(A, t.ku, "A")
    b = _as_members(B, t.kv, "B")
    coupled = np.outer(a, b)
    return CorrelationVector(np.where(coupled, e_from_q(t).e, base_point(t.q_u, t.q_v).e))


def inner_polytope(t: TargetSpec) -> list[CorrelationVector]:
    mu, mv = t.ku - 1, t.kv - 1
    if mu + mv > MAX_POLYTOPE_BITS:
        raise SizeError(f"2^{mu + mv} vertices exceeds the cap of 2^{MAX_POLYTOPE_BITS}")
    coupled = e_from_q(t).e
    prod = base_point(t.q_u, t.q_v).e
    out = []
    for amask in range(1 << mu):
        a = (amask >> np.arange(mu)) & 1
        for bmask in range(1 << mv):
            b = (bmask >> np.arange(mv)) & 1
            out.append(CorrelationVector(np.where(np.outer(a, b) == 1, coupled, prod)))
    return out


def polytope_contains(vertices, p: CorrelationVector, tol: float = DEFAULT_TOL) -> bool:
    """Is ``p`` within ``tol`` (sup norm) of the convex hull of ``vertices``?"""
    if not vertices:
        raise ArgumentError("empty vertex list")
    if tol < 0:
        raise ArgumentError("tol must be non-negative")
    V = np.stack([np.asarray(v.e, dtype=float).ravel() for v in vertices], axis=1)
    target = np.asarray(p.e, dtype=float).ravel()
    if any(v.e.shape != p.e.shape for v in vertices):
        raise ShapeError("all vectors must share one shape")
    m, n = V.shape[1], V.shape[0]
    # minimise the sup-norm residual t over convex weights w
    ones = np.ones((n, 1))
    res = linprog(
        c=np.concatenate([np.zeros(m), [1.0]]),
        A_ub=np.vstack([np.hstack([V, -ones]), np.hstack([-V, -ones])]),
        b_ub=np.concatenate([target, -target]),
        A_eq=np.concatenate([np.ones(m), [0.0]])[None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * (m + 1),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        return False
    w = np.clip(res.x[:m], 0.0, None)
    w /= w.sum()
    # re-check the residual ourselves; the solver's tolerances are relative
    return bool(np.max(np.abs(V @ w - target)) <= tol + 1e-12)


def theta_terms(rho: float, qU_phi, qV_phi, lam) -> dict[str, np.ndarray]:
    """Envelope quantities, batched over leading axes of the marginals.

    ``qU_phi`` has shape (..., ku-1) and holds Q_U(u) for u >= 1; likewise
    ``qV_phi``. ``lam`` is (ku-1, kv-1).
    """
    qu = np.asarray(qU_phi, dtype=float)[..., :, None]
    qv = np.asarray(qV_phi, dtype=float)[..., None, :]
    lam = np.asarray(lam, dtype=float)
    axes = (-2, -1)
    theta_phi = np.sum(lam * (2.0 * qu - 1.0) * (2.0 * qv - 1.0), axis=axes)
    theta_rho = np.sum(lam * np.sqrt(qu * qv), axis=axes)
    theta_rho2_1 = np.sum(lam * qu * (1.0 - qv), axis=axes)
    theta_rho2_2 = np.sum(lam * qu * qv, axis=axes)
    var_u = np.sum(lam * (qu * (1.0 - qu)), axis=axes)
    var_v = np.sum(lam * (qv * (1.0 - qv)), axis=axes)
    theta_rho2_3 = np.sqrt(np.maximum(var_u * var_v, 0.0))
    r = abs(rho)
    theta_plus = theta_phi + 2.0 * r * theta_rho + 0.5 * rho**2 * (-theta_rho + theta_rho2_1 + theta_rho2_3)
    theta_minus = theta_phi - 2.0 * r * theta_rho - 0.5 * rho**2 * (theta_rho2_2 + theta_rho2_3)
    return dict(
        theta_phi=theta_phi,
        theta_rho=theta_rho,
        theta_rho2_1=theta_rho2_1,
        theta_rho2_2=theta_rho2_2,
        theta_rho2_3=theta_rho2_3,
        theta_minus=theta_minus,
        theta_plus=theta_plus,
    )


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not abs(rho) <= 1.0:
        raise RangeError(f"|rho| must not exceed 1, got {rho!r}")
    return rho


def theta_bounds(rho: float, qU, qV, lam: LambdaWeights) -> BoundReport:
    """Closed-form envelope theta_minus <= sum(lam * e) <= theta_plus.

    The linear rho terms use |rho|; see the README for why the sign is dropped.
    """
    rho = _check_rho(rho)
    qU, qV = _marginal(qU, "Q_U"), _marginal(qV, "Q_V")
    if (qU.shape[0], qV.shape[0]) != (lam.ku, lam.kv):
        raise ShapeError(
            f"lambda is {lam.lam.shape}, marginals need ({qU.shape[0] - 1}, {qV.shape[0] - 1})"
        )
    terms = theta_terms(rho, qU[1:], qV[1:], lam.lam)
    return BoundReport(**{k: float(v) for k, v in terms.items()})


def lambda_score(e: CorrelationVector, lam: LambdaWeights) -> float:
    if e.e.shape != lam.lam.shape:
        raise ShapeError(f"e is {e.e.shape} but lambda is {lam.lam.shape}")
    return float(np.sum(lam.lam * e.e))


def outer_check(e: CorrelationVector, rho: float, qU, qV, lam: LambdaWeights, tol: float = DEFAULT_TOL) -> bool:
    score = lambda_score(e, lam)
    rep = theta_bounds(rho, qU, qV, lam)
    return rep.theta_minus - tol <= score <= rep.theta_plus + tol


def binary_special_case(rho: float, qU1: float, qV1: float) -> BoundReport:
    """Binary outputs, lambda = [1]: every sum collapses to its single term."""
    rho = _check_rho(rho)
    for name, q in (("qU1", qU1), ("qV1", qV1)):
        if not 0.0 < q < 1.0:
            raise RangeError(f"{name} must lie in (0,1), got {q!r}")
    qu, qv = float(qU1), float(qV1)
    theta_phi = (2.0 * qu - 1.0) * (2.0 * qv - 1.0)
    theta_rho = math.sqrt(qu * qv)
    theta_rho2_1 = qu * (1.0 - qv)
    theta_rho2_2 = qu * qv
    theta_rho2_3 = math.sqrt(max((qu * (1.0 - qu)) * (qv * (1.0 - qv)), 0.0))
    r = abs(rho)
    return BoundReport(
        theta_phi=theta_phi,
        theta_rho=theta_rho,
        theta_rho2_1=theta_rho2_1,
        theta_rho2_2=theta_rho2_2,
        theta_rho2_3=theta_rho2_3,
        theta_minus=theta_phi - 2.0 * r * theta_rho - 0.5 * rho**2 * (theta_rho2_2 + theta_rho2_3),
        theta_plus=theta_phi + 2.0 * r * theta_rho + 0.5 * rho**2 * (-theta_rho + theta_rho2_1 + theta_rho2_3),
    )


def lambda_grid(ku: int, kv: int, resolution: int, cap: int = DEFAULT_GRID_CAP) -> list[LambdaWeights]:
    """Every lambda on the simplex with entries in {0, 1/r, ..., 1}.

    Ordered lexicographically by the integer counts, largest first, so the
    single-entry vertices e_1, e_2, ... come in a stable order.
    """
    if resolution < 1:
        raise ArgumentError("resolution must be at least 1")
    if ku < 2 or kv < 2:
        raise ArgumentError("alphabets need at least 2 symbols")
    m = (ku - 1) * (kv - 1)
    count = math.comb(resolution + m - 1, m - 1)
    if count > cap:
        raise SizeError(f"lambda grid has {count} points, cap is {cap}")
    out = []
    for bars in itertools.combinations(range(resolution + m - 1), m - 1):
        edges = (-1,) + bars + (resolution + m - 1,)
        counts = [edges[i + 1] - edges[i] - 1 for i in range(m)]
        out.append(counts)
    out.sort(reverse=True)
    return [LambdaWeights(np.array(c, dtype=float).reshape(ku - 1, kv - 1) / resolution) for c in out]
