import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlab.operators import (
    DimensionError,
    NotHermitianError,
    Povm,
    haar_random_state,
    haar_random_unitary,
    haar_random_von_neumann,
    hs_inner,
    is_projector,
    largest_eigenvalue,
    projector,
    random_density,
    random_hermitian,
    random_rank_one_povm,
    spectrum,
    tensor,
    top_eigenpair,
    validate_povm,
)

from oracles import hs_loop, largest_root

seeds = st.integers(0, 2**32 - 1)


def haar_moment(d, k):
    return math.gamma(d) * math.gamma(k + 1) / (math.gamma(1) * math.gamma(d + k))


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(3), np.eye(3)) == 3

    def test_sic_projectors(self, sic_in):
        kets = sic_in(4).kets
        assert hs_inner(projector(kets[0]), projector(kets[5])) == pytest.approx(1 / 5, abs=1e-12)

    def test_matches_double_loop(self, rng):
        a, b = random_hermitian(3, rng), random_hermitian(3, rng)
        assert hs_inner(a, b) == pytest.approx(hs_loop(a, b).real, abs=1e-12)
        assert abs(hs_loop(a, b).imag) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            hs_inner(np.eye(2), np.eye(3))

    @given(seeds)
    def test_symmetric_and_positive(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_hermitian(4, rng), random_hermitian(4, rng)
        assert hs_inner(a, b) == pytest.approx(hs_inner(b, a), abs=1e-12)
        assert hs_inner(a, a) >= 0


class TestEigen:
    def test_identity(self):
        assert largest_eigenvalue(np.eye(5)) == pytest.approx(1.0, abs=1e-15)

    def test_identity_plus_projector(self, rng):
        d = 3
        pi = projector(haar_random_state(d, rng))
        x = (np.eye(d) + pi) / (d * (d + 1))
        assert largest_eigenvalue(x) == pytest.approx(1 / 6, abs=1e-14)

    def test_matches_characteristic_polynomial(self, rng):
        for _ in range(5):
            x = random_hermitian(4, rng)
            assert largest_eigenvalue(x) == pytest.approx(largest_root(x), abs=1e-9)

    def test_eigenvector(self, rng):
        x = random_hermitian(5, rng)
        lam, v = top_eigenpair(x)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(x @ v, lam * v, atol=1e-12)

    def test_full_spectrum_descending(self, rng):
        s = spectrum(random_hermitian(6, rng))
        assert np.all(np.diff(s) <= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            largest_eigenvalue(np.array([[0, 1], [0, 0]], dtype=complex))

    @given(seeds)
    def test_at_least_mean(self, seed):
        x = random_hermitian(4, np.random.default_rng(seed))
        assert largest_eigenvalue(x) >= np.trace(x).real / 4 - 1e-12


class TestTensor:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_trace_multiplicative(self, rng):
        a, b = random_hermitian(2, rng), random_hermitian(3, rng)
        assert np.trace(tensor(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)

    def test_product_of_projectors(self, rng):
        p = tensor(projector(haar_random_state(2, rng)), projector(haar_random_state(2, rng)))
        assert p.shape == (4, 4)
        assert is_projector(p)

    @given(seeds)
    def test_top_eigenvalue_of_psd_product(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_density(2, rng), random_density(3, rng)
        assert largest_eigenvalue(tensor(a, b)) == pytest.approx(
            largest_eigenvalue(a) * largest_eigenvalue(b), abs=1e-12)


class TestHaar:
    def test_state_is_normalized(self, rng):
        for d in (1, 2, 7):
            assert np.linalg.norm(haar_random_state(d, rng)) == pytest.approx(1, abs=1e-12)

    def test_seeded_reproducible(self):
        a = haar_random_state(4, np.random.default_rng(9))
        b = haar_random_state(4, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("k", [1, 2])
    def test_state_moments(self, k):
        rng = np.random.default_rng(77 + k)
        d, n = 2, 100_000
        phi = np.array([1, 0], dtype=complex)
        samples = np.array([abs(np.vdot(haar_random_state(d, rng), phi)) ** (2 * k)
                            for _ in range(n)])
        target = haar_moment(d, k)
        assert target == pytest.approx([1 / 2, 1 / 3][k - 1])
        assert abs(samples.mean() - target) < 3 * samples.std(ddof=1) / math.sqrt(n)

    @pytest.mark.parametrize("d", [3, 4])
    def test_state_moments_higher_dim(self, d):
        rng = np.random.default_rng(d)
        n = 50_000
        phi = haar_random_state(d, rng)
        ov = np.array([abs(np.vdot(haar_random_state(d, rng), phi)) ** 2 for _ in range(n)])
        for k in (1, 2):
            s = ov ** k
            assert abs(s.mean() - haar_moment(d, k)) < 3 * s.std(ddof=1) / math.sqrt(n)

    def test_unitary(self, rng):
        u = haar_random_unitary(5, rng)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)

    def test_von_neumann_structure(self, rng):
        g = haar_random_von_neumann(3, rng)
        assert validate_povm(g)
        for b, e in enumerate(g):
            assert is_projector(e)
            for c, f in enumerate(g):
                if b != c:
                    assert np.max(np.abs(e @ f)) < 1e-10

    def test_von_neumann_distribution(self):
        rng = np.random.default_rng(2718)
        n = 100_000
        pi = projector(np.array([1, 0], dtype=complex))
        s = np.array([np.trace(pi @ haar_random_von_neumann(2, rng).elements[0]).real ** 2
                      for _ in range(n)])
        assert abs(s.mean() - 1 / 3) < 3 * s.std(ddof=1) / math.sqrt(n)

    def test_unitary_entry_distribution(self):
        rng = np.random.default_rng(5)
        vals = np.array([abs(haar_random_unitary(2, rng)[0, 0]) ** 2 for _ in range(20_000)])
        # |U_00|^2 is uniform on [0,1] under Haar: mean 1/2, variance 1/12
        assert abs(vals.mean() - 0.5) < 3 * math.sqrt(1 / 12 / len(vals))
        assert abs(vals.var() - 1 / 12) < 0.005


class TestPovm:
    def test_sic_povm_passes(self, sic_in):
        s = sic_in(2)
        povm = Povm(s.ensemble.projectors / 2)
        assert validate_povm(povm).passed

    def test_incomplete_fails(self):
        check = validate_povm(Povm(np.array([np.eye(2) / 2, np.eye(2) / 3])))
        assert not check.passed
        assert check.completeness_residual == pytest.approx(1 / 6, abs=1e-15)

    def test_negative_element_fails(self):
        e = np.diag([1.5, 1.0]).astype(complex)
        check = validate_povm(Povm(np.array([e, np.eye(2) - e])))
        assert check.completeness_residual < 1e-15
        assert check.positivity_margin == pytest.approx(-0.5)
        assert not check

    def test_random_rank_one(self, rng):
        povm = random_rank_one_povm(3, 7, rng)
        assert validate_povm(povm)
        weights, dirs = povm.rank_one_decomposition()
        assert weights.sum() == pytest.approx(3, abs=1e-10)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1, atol=1e-12)

    def test_from_rank_one_round_trip(self, rng):
        povm = random_rank_one_povm(2, 4, rng)
        w, v = povm.rank_one_decomposition()
        np.testing.assert_allclose(Povm.from_rank_one(w, v).elements, povm.elements, atol=1e-12)

    def test_rank_one_decomposition_rejects_full_rank(self):
        with pytest.raises(ValueError):
            Povm(np.array([np.eye(2)])).rank_one_decomposition()

    def test_elements_are_read_only(self, rng):
        povm = random_rank_one_povm(2, 3, rng)
        with pytest.raises(ValueError):
            povm.elements[0, 0, 0] = 1
