import numpy as np
import pytest

from niss import (
    BinarySourceSpec,
    TruthTable,
    achievable_scan,
    e_from_q,
    enumerate_functions,
    joint_distribution,
    lambda_grid,
    sandwich_report,
    verify_correlation_formula,
)
from niss.errors import AlphabetError, ShapeError, SizeError
from niss.oracle import extend_table, function_array, function_count

from conftest import brute_joint, random_source


class TestEnumerate:
    @pytest.mark.parametrize("d,k,n", [(1, 2, 4), (2, 2, 16), (2, 3, 81)])
    def test_counts(self, d, k, n):
        assert function_count(d, k) == n
        assert len(list(enumerate_functions(d, k))) == n

    def test_distinct(self):
        F = function_array(2, 3)
        assert len({tuple(r) for r in F}) == 81

    def test_lexicographic(self):
        F = function_array(1, 2)
        assert F.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_cap(self):
        with pytest.raises(SizeError):
            function_array(3, 4, cap=1000)


class TestJoint:
    def test_dsbs_identity(self):
        eps = 0.12
        t = joint_distribution(TruthTable(np.array([0, 1])), TruthTable(np.array([0, 1])), BinarySourceSpec.dsbs(eps))
        assert t.q[1, 1] == pytest.approx((1 - eps) / 2, abs=1e-15)
        assert t.q[0, 1] == pytest.approx(eps / 2, abs=1e-15)

    def test_constants(self, rng):
        t = joint_distribution(TruthTable(np.full(4, 2)), TruthTable(np.zeros(4, dtype=int)), random_source(rng), 3, 2)
        assert t.q[2, 0] == pytest.approx(1.0)
        assert t.q.sum() == pytest.approx(1.0)

    def test_marginals_match_product_weights(self, rng):
        src = random_source(rng)
        f = rng.integers(0, 3, size=8)
        t = joint_distribution(TruthTable(f), TruthTable(rng.integers(0, 2, size=8)), src, 3, 2)
        px = brute_joint(src, 3).sum(axis=1)
        assert np.allclose(t.q_u, [px[f == u].sum() for u in range(3)], atol=1e-15)

    def test_independent_source_factorizes(self, rng):
        src = BinarySourceSpec.independent(0.3, 0.6)
        t = joint_distribution(TruthTable(rng.integers(0, 3, 4)), TruthTable(rng.integers(0, 3, 4)), src, 3, 3)
        assert np.allclose(t.q, np.outer(t.q_u, t.q_v), atol=1e-15)

    def test_symbol_out_of_range(self, rng):
        with pytest.raises(AlphabetError):
            joint_distribution(TruthTable(np.array([0, 3])), TruthTable(np.array([0, 1])), random_source(rng), 3)

    def test_dimension(self, rng):
        with pytest.raises(ShapeError):
            joint_distribution(TruthTable(np.zeros(2, int)), TruthTable(np.zeros(4, int)), random_source(rng))


class TestVerify:
    def test_random_pairs(self, rng):
        worst = 0.0
        for _ in range(200):
            d = int(rng.integers(1, 4))
            ku, kv = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            src = random_source(rng)
            chk = verify_correlation_formula(
                TruthTable(rng.integers(0, ku, 1 << d)), TruthTable(rng.integers(0, kv, 1 << d)), src, ku, kv
            )
            worst = max(worst, chk.max_discrepancy)
        assert worst <= 1e-12

    def test_emap_against_brute(self, rng):
        src = random_source(rng)
        f, g = rng.integers(0, 3, 8), rng.integers(0, 3, 8)
        W = brute_joint(src, 3)
        chk = verify_correlation_formula(TruthTable(f), TruthTable(g), src, 3, 3)
        direct = np.array([[np.where(f == u, 1, -1) @ W @ np.where(g == v, 1, -1) for v in (1, 2)] for u in (1, 2)])
        assert np.max(np.abs(chk.emap - direct)) <= 1e-12


class TestScan:
    @pytest.mark.parametrize("d,n", [(1, 16), (2, 256)])
    def test_counts(self, d, n):
        assert len(achievable_scan(d, 2, 2, BinarySourceSpec.dsbs(0.1))) == n

    def test_records_match_joint(self, rng):
        src = random_source(rng)
        scan = achievable_scan(1, 3, 2, src)
        F, G = function_array(1, 3), function_array(1, 2)
        for rec in scan.records[::5]:
            t = joint_distribution(TruthTable(F[rec.f_index]), TruthTable(G[rec.g_index]), src, 3, 2)
            assert np.max(np.abs(rec.target.q - t.q)) <= 1e-15
            assert np.max(np.abs(rec.e.e - e_from_q(t).e)) <= 1e-12

    def test_marginals_depend_on_one_side(self, rng):
        scan = achievable_scan(2, 2, 2, random_source(rng))
        qu = scan.q.sum(axis=2)
        for fi in range(16):
            rows = qu[scan.f_index == fi]
            assert np.max(np.abs(rows - rows[0])) <= 1e-15

    def test_jobs_identical(self, rng):
        src = random_source(rng)
        assert np.array_equal(achievable_scan(2, 2, 3, src).q, achievable_scan(2, 2, 3, src, jobs=4).q)

    def test_caps(self):
        with pytest.raises(SizeError):
            achievable_scan(4, 2, 2, BinarySourceSpec.dsbs(0.1))
        with pytest.raises(SizeError):
            achievable_scan(2, 3, 3, BinarySourceSpec.dsbs(0.1), pair_cap=1000)


class TestSandwich:
    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.2, 0.45])
    def test_single_letter_dsbs(self, eps):
        rep = sandwich_report(achievable_scan(1, 2, 2, BinarySourceSpec.dsbs(eps)), lambda_grid(2, 2, 2))
        assert rep.violations == []

    def test_independent_collapse(self, rng):
        src = BinarySourceSpec.independent(0.35, 0.7)
        rep = sandwich_report(achievable_scan(2, 3, 2, src), lambda_grid(3, 2, 2))
        assert rep.violations == []
        assert np.max(np.abs(rep.upper_margin)) <= 1e-14
        assert np.max(np.abs(rep.lower_margin)) <= 1e-14

    def test_known_upper_violation(self):
        # f = g = indicator of x = (+1,+1) under a strongly correlated source
        rep = sandwich_report(achievable_scan(2, 2, 2, BinarySourceSpec.dsbs(0.05)), lambda_grid(2, 2, 1))
        F = function_array(2, 2)
        i = int(np.nonzero((F == [0, 0, 0, 1]).all(axis=1))[0][0])
        hits = [v for v in rep.violations if scan_pair(rep, v.record) == (i, i)]
        assert hits and hits[0].side == "upper"
        assert hits[0].margin == pytest.approx(0.9025 - 0.750625, abs=1e-12)

    def test_shape(self):
        with pytest.raises(ShapeError):
            sandwich_report(achievable_scan(1, 2, 2, BinarySourceSpec.dsbs(0.1)), lambda_grid(3, 2, 1))


def scan_pair(rep, i):
    return int(rep.f_index[i]), int(rep.g_index[i])


class TestInvariants:
    def test_relabeling(self, rng):
        src = random_source(rng)
        f, g = rng.integers(0, 3, 4), rng.integers(0, 3, 4)
        perm = np.array([0, 2, 1])
        a = joint_distribution(TruthTable(f), TruthTable(g), src, 3, 3)
        b = joint_distribution(TruthTable(perm[f]), TruthTable(g), src, 3, 3)
        assert np.array_equal(b.q, a.q[perm])

    def test_extension(self, rng):
        src = random_source(rng)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            f, g = TruthTable(rng.integers(0, 3, 1 << d)), TruthTable(rng.integers(0, 2, 1 << d))
            a = joint_distribution(f, g, src, 3, 2)
            b = joint_distribution(extend_table(f), extend_table(g), src, 3, 2)
            assert np.max(np.abs(a.q - b.q)) <= 1e-14

    def test_swap_roles(self, rng):
        pxy = rng.dirichlet(np.ones(4)).reshape(2, 2)
        f, g = rng.integers(0, 3, 4), rng.integers(0, 2, 4)
        a = joint_distribution(TruthTable(f), TruthTable(g), BinarySourceSpec(pxy), 3, 2)
        b = joint_distribution(TruthTable(g), TruthTable(f), BinarySourceSpec(pxy.T), 2, 3)
        assert np.allclose(a.q, b.q.T, atol=1e-15)
