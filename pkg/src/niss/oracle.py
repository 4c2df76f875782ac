"""Exhaustive ground truth at small blocklength.

Everything here is an exact weighted sum over the 2^d x 2^d input pairs; no
sampling. Scans enumerate every deterministic pair (f, g) and store the
resulting joint distributions as stacked arrays. Use ``ScanReport.records``
for the per-pair view.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import itertools

import numpy as np

from .bounds import (
    CorrelationVector,
    LambdaWeights,
    TargetSpec,
    e_from_q,
    theta_terms,
)
from .errors import ShapeError, SizeError
from .fourier import (
    BinarySourceSpec,
    TruthTable,
    analyze,
    check_symbols,
    cross_correlation,
    indicator_lift,
)

FUNCTION_CAP = 10**6
PAIR_CAP = 10**7
MAX_SCAN_D = 4


def function_count(d: int, k: int) -> int:
    return k ** (1 << d)


def _check_function_cap(d: int, k: int, cap: int) -> int:
    n = function_count(d, k)
    if n > cap:
        raise SizeError(f"{k}^(2^{d}) = {n} functions exceeds the cap; need cap >= {n}")
    return n


def function_array(d: int, k: int, cap: int = FUNCTION_CAP) -> np.ndarray:
    """All k-ary tables on {-1,1}^d as rows, in lexicographic digit order."""
    _check_function_cap(d, k, cap)
    return np.array(list(itertools.product(range(k), repeat=1 << d)), dtype=np.int64).reshape(-1, 1 << d)


def enumerate_functions(d: int, k: int, cap: int = FUNCTION_CAP):
    _check_function_cap(d, k, cap)
    for digits in itertools.product(range(k), repeat=1 << d):
        yield TruthTable(np.array(digits, dtype=np.int64))


def _alphabet(f: TruthTable, k: int | None) -> int:
    vals = check_symbols(f.values, k)
    return k if k is not None else max(2, int(vals.max()) + 1)


def _one_hot(vals: np.ndarray, k: int) -> np.ndarray:
    """(..., k, n) indicators from (..., n) symbols."""
    return (vals[..., None, :] == np.arange(k)[:, None]).astype(float)


def joint_distribution(
    f: TruthTable, g: TruthTable, src: BinarySourceSpec, ku: int | None = None, kv: int | None = None
) -> TargetSpec:
    if f.d != g.d:
        raise ShapeError(f"dimension mismatch: {f.d} vs {g.d}")
    ku, kv = _alphabet(f, ku), _alphabet(g, kv)
    W = src.joint_weights(f.d)
    F = _one_hot(check_symbols(f.values), ku)
    G = _one_hot(check_symbols(g.values), kv)
    q = np.zeros((ku, kv))
    n = 1 << f.d
    for x in range(n):
        for y in range(n):
            q += W[x, y] * np.outer(F[:, x], G[:, y])
    return TargetSpec(q)


@dataclass(frozen=True)
class CorrelationCheck:
    direct: np.ndarray  # (ku, kv): sum of P(x,y) chi_u(x) chi_v(y)
    fourier: np.ndarray  # (ku, kv): sum_S f_S g_S rho^|S|
    emap: np.ndarray  # (ku-1, kv-1): e_from_q(joint_distribution)
    max_discrepancy: float


def verify_correlation_formula(
    f: TruthTable, g: TruthTable, src: BinarySourceSpec, ku: int | None = None, kv: int | None = None
) -> CorrelationCheck:
    """Three independent routes to E[chi(f=u) chi(g=v)]."""
    if f.d != g.d:
        raise ShapeError(f"dimension mismatch: {f.d} vs {g.d}")
    ku, kv = _alphabet(f, ku), _alphabet(g, kv)
    W = src.joint_weights(f.d)
    lifts_f = [indicator_lift(f, u, ku) for u in range(ku)]
    lifts_g = [indicator_lift(g, v, kv) for v in range(kv)]
    direct = np.array(
        [[float(np.sum(W * np.outer(lf.values, lg.values))) for lg in lifts_g] for lf in lifts_f]
    )
    spec_f = [analyze(lf, src.p_x) for lf in lifts_f]
    spec_g = [analyze(lg, src.p_y) for lg in lifts_g]
    fourier = np.array([[cross_correlation(sf, sg, src.rho) for sg in spec_g] for sf in spec_f])
    emap = e_from_q(joint_distribution(f, g, src, ku, kv)).e
    disc = max(
        float(np.max(np.abs(direct - fourier))),
        float(np.max(np.abs(direct[1:, 1:] - emap))),
        float(np.max(np.abs(fourier[1:, 1:] - emap))),
    )
    return CorrelationCheck(direct, fourier, emap, disc)


@dataclass(frozen=True)
class ScanRecord:
    f_index: int
    g_index: int
    target: TargetSpec
    e: CorrelationVector
    lambda_scores: np.ndarray


@dataclass(frozen=True)
class Violation:
    record: int  # position in the scan, not the function index
    lam: int  # position in the lambda grid
    side: str  # "upper" (score above theta_plus) or "lower"
    margin: float  # signed; > 0 means outside the envelope


@dataclass(frozen=True)
class ScanReport:
    source: BinarySourceSpec
    d: int
    ku: int
    kv: int
    f_index: np.ndarray
    g_index: np.ndarray
    q: np.ndarray  # (N, ku, kv)
    e: np.ndarray  # (N, ku-1, kv-1)
    lambdas: tuple[LambdaWeights, ...] = ()
    lambda_scores: np.ndarray | None = None  # (N, L)
    upper_margin: np.ndarray | None = None  # score - theta_plus
    lower_margin: np.ndarray | None = None  # theta_minus - score
    violations: list[Violation] = field(default_factory=list)
    tol: float | None = None

    def __len__(self) -> int:
        return self.q.shape[0]

    @property
    def records(self) -> list[ScanRecord]:
        scores = self.lambda_scores if self.lambda_scores is not None else np.zeros((len(self), 0))
        return [
            ScanRecord(int(self.f_index[i]), int(self.g_index[i]), TargetSpec(self.q[i]),
                       CorrelationVector(self.e[i]), scores[i])
            for i in range(len(self))
        ]

    def worst_margin(self) -> float | None:
        if self.upper_margin is None:
            return None
        return float(max(self.upper_margin.max(), self.lower_margin.max()))


def _scan_block(F_hot: np.ndarray, G_hot: np.ndarray, W: np.ndarray) -> np.ndarray:
    FW = np.einsum("aux,xy->auy", F_hot, W)
    return np.einsum("auy,bvy->abuv", FW, G_hot)


def achievable_scan(
    d: int,
    ku: int,
    kv: int,
    src: BinarySourceSpec,
    pair_cap: int = PAIR_CAP,
    function_cap: int = FUNCTION_CAP,
    jobs: int = 1,
) -> ScanReport:
    """Joint distribution of every deterministic pair, ordered by (f_index, g_index)."""
    if d > MAX_SCAN_D:
        raise SizeError(f"scans are limited to d <= {MAX_SCAN_D}")
    nf, ng = function_count(d, ku), function_count(d, kv)
    if nf * ng > pair_cap:
        raise SizeError(f"{nf} x {ng} = {nf * ng} pairs exceeds the cap; need cap >= {nf * ng}")
    F = function_array(d, ku, function_cap)
    G = function_array(d, kv, function_cap)
    F_hot, G_hot = _one_hot(F, ku), _one_hot(G, kv)
    W = src.joint_weights(d)
    blocks = np.array_split(np.arange(nf), max(1, min(jobs, nf)))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda b: _scan_block(F_hot[b], G_hot, W), blocks))
    else:
        parts = [_scan_block(F_hot[b], G_hot, W) for b in blocks]
    q = np.concatenate(parts, axis=0).reshape(nf * ng, ku, kv)
    q = np.where(q < 0, 0.0, q)
    qu, qv = q.sum(axis=2), q.sum(axis=1)
    e = 4.0 * q[:, 1:, 1:] - 2.0 * qu[:, 1:, None] - 2.0 * qv[:, None, 1:] + 1.0
    fi, gi = np.divmod(np.arange(nf * ng), ng)
    return ScanReport(src, d, ku, kv, fi, gi, q, e)


def sandwich_report(scan: ScanReport, grid, tol: float = 1e-9) -> ScanReport:
    """Check every record against the closed-form envelope under its own marginals."""
    grid = tuple(grid)
    for lam in grid:
        if (lam.ku, lam.kv) != (scan.ku, scan.kv):
            raise ShapeError(f"lambda of shape {lam.lam.shape} does not fit a {scan.ku}x{scan.kv} scan")
    n = len(scan)
    qu, qv = scan.q.sum(axis=2), scan.q.sum(axis=1)
    scores = np.zeros((n, len(grid)))
    upper = np.zeros((n, len(grid)))
    lower = np.zeros((n, len(grid)))
    for j, lam in enumerate(grid):
        terms = theta_terms(scan.source.rho, qu[:, 1:], qv[:, 1:], lam.lam)
        scores[:, j] = np.sum(lam.lam[None] * scan.e, axis=(1, 2))
        upper[:, j] = scores[:, j] - terms["theta_plus"]
        lower[:, j] = terms["theta_minus"] - scores[:, j]
    violations = []
    for side, margin in (("upper", upper), ("lower", lower)):
        for i, j in zip(*np.nonzero(margin > tol)):
            violations.append(Violation(int(i), int(j), side, float(margin[i, j])))
    violations.sort(key=lambda v: (v.record, v.lam, v.side))
    return replace(
        scan,
        lambdas=grid,
        lambda_scores=scores,
        upper_margin=upper,
        lower_margin=lower,
        violations=violations,
        tol=tol,
    )


def extend_table(f: TruthTable) -> TruthTable:
    """Same function on one more coordinate, ignoring the new one."""
    n = len(f)
    return TruthTable(np.asarray(f.values)[np.arange(2 * n) % n])
