import numpy as np
import pytest

from niss import GeneralSourceSpec, TruthTable, expand, gram_schmidt, reconstruct, subset_order
from niss.errors import InvalidSourceError, ShapeError
from niss.fourier import bernoulli_moments, parity_matrix, product_weights
from niss.ortho import gram_residual


def random_pmf(rng, d, zeros=0):
    w = rng.dirichlet(np.ones(1 << d))
    if zeros:
        w[rng.choice(1 << d, size=zeros, replace=False)] = 0.0
        w /= w.sum()
    return w


def product_pmf(ps):
    w = np.ones(1)
    for p in ps:
        w = np.kron([1 - p, p], w)
    return w


class TestSubsetOrder:
    def test_d0(self):
        assert subset_order(0) == [0]

    def test_d2(self):
        # {}, {1}, {2}, {1,2}
        assert subset_order(2) == [0b00, 0b01, 0b10, 0b11]

    def test_d3_listing(self):
        listed = [set(), {1}, {2}, {1, 2}, {3}, {1, 3}, {2, 3}, {1, 2, 3}]
        masks = [sum(1 << (j - 1) for j in s) for s in listed]
        assert subset_order(3) == masks


class TestGramSchmidt:
    def test_product_measure_gives_parities(self):
        p = 0.3
        basis = gram_schmidt(GeneralSourceSpec(product_weights(p, 3)))
        mu, sigma = bernoulli_moments(p)
        assert not basis.trivial_flags.any()
        assert np.max(np.abs(basis.matrix - parity_matrix(3, mu, sigma))) <= 1e-10

    def test_heterogeneous_product(self):
        ps = [0.2, 0.5, 0.9]
        src = GeneralSourceSpec(product_pmf(ps))
        basis = gram_schmidt(src)
        mus = np.array([2 * p - 1 for p in ps])
        sig = np.sqrt(1 - mus**2)
        assert np.max(np.abs(basis.matrix - parity_matrix(3, mus, sig))) <= 1e-10

    def test_two_point_support(self):
        # mass on (-1,-1) and (+1,+1): x2 = x1 and x1 x2 = 1 on the support
        pmf = np.array([0.5, 0.0, 0.0, 0.5])
        src = GeneralSourceSpec(pmf)
        basis = gram_schmidt(src)
        assert basis.trivial_flags.tolist() == [False, False, True, True]
        phi = parity_matrix(2, src.mu, src.sigma)
        assert basis.rank == np.linalg.matrix_rank((phi * pmf) @ phi.T)

    def test_single_coordinate(self):
        p = 0.7
        basis = gram_schmidt(GeneralSourceSpec(np.array([1 - p, p])))
        mu, sigma = bernoulli_moments(p)
        assert np.allclose(basis.matrix[0], 1.0)
        assert np.allclose(basis.matrix[1], (np.array([-1, 1]) - mu) / sigma)

    def test_orthonormal_and_count(self, rng):
        for _ in range(30):
            d = int(rng.integers(1, 5))
            zeros = int(rng.integers(0, (1 << d) // 2 + 1))
            try:
                src = GeneralSourceSpec(random_pmf(rng, d, zeros))
            except InvalidSourceError:
                continue
            basis = gram_schmidt(src)
            assert gram_residual(basis, src) <= 1e-8
            assert basis.rank == np.count_nonzero(src.pmf)
            assert np.allclose(basis.matrix[0], 1.0)

    def test_deterministic(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 3))
        assert np.array_equal(gram_schmidt(src).matrix, gram_schmidt(src).matrix)

    def test_degenerate_coordinate(self):
        with pytest.raises(InvalidSourceError):
            GeneralSourceSpec(np.array([0.5, 0.0, 0.5, 0.0]))  # x1 = -1 always


class TestExpand:
    def test_constant(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 3))
        c = expand(TruthTable(np.full(8, -1.5)), src, gram_schmidt(src))
        assert c[0] == pytest.approx(-1.5)
        assert np.allclose(c[1:], 0, atol=1e-10)

    def test_basis_element(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 3))
        basis = gram_schmidt(src)
        c = expand(TruthTable(basis.matrix[5]), src, basis)
        assert np.allclose(c, np.eye(8)[5], atol=1e-10)

    def test_parseval(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 3))
        basis = gram_schmidt(src)
        g = rng.normal(size=8)
        c = expand(TruthTable(g), src, basis)
        assert abs(np.sum(c**2) - np.sum(src.pmf * g**2)) <= 1e-8

    def test_trivial_entries_zero(self):
        src = GeneralSourceSpec(np.array([0.5, 0.0, 0.0, 0.5]))
        basis = gram_schmidt(src)
        c = expand(TruthTable(np.array([3.0, 1.0, 2.0, -1.0])), src, basis)
        assert np.all(c[basis.trivial_flags] == 0)

    def test_shape(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 2))
        with pytest.raises(ShapeError):
            expand(TruthTable(np.zeros(8)), src, gram_schmidt(src))


class TestReconstruct:
    def test_full_support(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 4))
        basis = gram_schmidt(src)
        g = rng.normal(size=16)
        back = reconstruct(expand(TruthTable(g), src, basis), basis).values
        assert np.max(np.abs(back - g)) <= 1e-8

    def test_partial_support(self, rng):
        pmf = random_pmf(rng, 3)
        pmf[[2, 5]] = 0
        pmf /= pmf.sum()
        src = GeneralSourceSpec(pmf)
        basis = gram_schmidt(src)
        g = rng.normal(size=8)
        back = reconstruct(expand(TruthTable(g), src, basis), basis).values
        on = pmf > 0
        assert np.max(np.abs(back[on] - g[on])) <= 1e-8

    def test_zero(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 2))
        assert np.all(reconstruct(np.zeros(4), gram_schmidt(src)).values == 0)

    def test_length(self, rng):
        src = GeneralSourceSpec(random_pmf(rng, 2))
        with pytest.raises(ShapeError):
            reconstruct(np.zeros(3), gram_schmidt(src))
