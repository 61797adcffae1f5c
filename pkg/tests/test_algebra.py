import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxplus_fj.algebra import (EPS, DimensionError, asmatrix, diag, identity, is_diagonal, is_support,
                                leq, madd, mp_equal, mp_power, norm, null, oplus, otimes, otimes_vec, phi,
                                psi, scalar_otimes, transpose, zeros)

from conftest import naive_otimes

E = EPS
G_TANDEM = np.array([[E, 0.0], [E, E]])
G_DIAMOND = np.full((4, 4), E)
for i, j in [(0, 1), (0, 2), (1, 3), (2, 3)]:
    G_DIAMOND[i, j] = 0.0


def entry():
    return st.one_of(st.just(EPS), st.floats(-50, 50, allow_nan=False))


@st.composite
def square_triples(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    mats = [np.array(draw(st.lists(entry(), min_size=n * n, max_size=n * n))).reshape(n, n)
            for _ in range(3)]
    return mats


class TestExamples:
    def test_oplus(self):
        A = np.array([[1, E], [3, 2]])
        assert mp_equal(oplus(null(2), A), A)
        assert mp_equal(oplus([[1, 2]], [[2, 1]]), [[2, 2]])
        assert mp_equal(oplus(A, A), A)

    def test_otimes_identity_and_null(self):
        A = np.array([[1.5, E], [-3, 2]])
        assert mp_equal(otimes(identity(2), A), A)
        assert mp_equal(otimes(A, identity(2)), A)
        assert mp_equal(otimes(null(2), A), null(2))

    def test_otimes_tandem_sandwich(self):
        D = diag([1, 2])
        got = otimes(otimes(D, G_TANDEM.T), D)
        expected = naive_otimes(naive_otimes(D, G_TANDEM.T), D)
        assert mp_equal(expected, [[E, E], [3, E]])
        assert mp_equal(got, expected)

    def test_otimes_matches_naive(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n, k, m = rng.integers(1, 6, 3)
            A = rng.uniform(-5, 5, (n, k))
            B = rng.uniform(-5, 5, (k, m))
            A[rng.random(A.shape) < 0.3] = E
            B[rng.random(B.shape) < 0.3] = E
            assert mp_equal(otimes(A, B), naive_otimes(A, B), 1e-12)

    def test_otimes_blocked_path(self):
        rng = np.random.default_rng(1)
        A = rng.uniform(-1, 1, (70, 5))
        B = rng.uniform(-1, 1, (5, 3))
        assert mp_equal(otimes(A, B), naive_otimes(A, B), 1e-12)

    def test_madd(self):
        A = np.array([[1.0, E], [0.5, -2]])
        assert mp_equal(madd(zeros(2), A), A)
        assert mp_equal(madd([[1, E]], [[2, 5]]), [[3, E]])
        B = np.array([[4.0, 1], [E, 7]])
        assert mp_equal(madd(A, B), madd(B, A))

    def test_powers(self):
        assert mp_equal(mp_power(G_TANDEM, 0), identity(2))
        assert mp_equal(mp_power(G_TANDEM, 2), null(2))
        assert not mp_equal(mp_power(G_DIAMOND, 2), null(4))
        assert mp_equal(mp_power(G_DIAMOND, 3), null(4))

    def test_phi(self):
        D = diag([1, 2])
        assert mp_equal(phi(D, G_TANDEM, 0), D)
        assert mp_equal(phi(D, G_TANDEM.T, 1), [[E, E], [3, E]])
        assert mp_equal(phi(D, G_TANDEM, 2), null(2))

    def test_psi(self):
        D = diag([1, 2])
        assert mp_equal(psi(G_TANDEM, D, 0, 0), D)
        assert mp_equal(psi(G_TANDEM, D, 1, 0), [[E, 2], [E, E]])
        assert mp_equal(psi(G_TANDEM, D, 1, 1), null(2))
        assert mp_equal(psi(G_DIAMOND, diag([1, 2, 3, 4]), 2, 1), null(4))

    def test_norm_leq_scalar(self):
        assert norm(diag([1, 2])) == 2
        assert norm(null(3)) == EPS
        A = np.array([[1.0, E], [2, 3]])
        assert leq(null(2), A)
        assert not leq(A, null(2))
        assert mp_equal(scalar_otimes(3, [[1, E]]), [[4, E]])

    def test_leq_tolerance(self):
        assert not leq([[1.0 + 1e-12]], [[1.0]])
        assert leq([[1.0 + 1e-12]], [[1.0]], atol=1e-9)

    def test_transpose_and_vector(self):
        A = np.array([[1.0, E], [3, 2]])
        assert mp_equal(transpose(A), [[1, 3], [E, 2]])
        assert np.array_equal(otimes_vec(A, [0.0, 0.0]), [1.0, 3.0])

    def test_structure_predicates(self):
        assert is_diagonal(diag([1, -2, 3]))
        assert not is_diagonal(G_TANDEM)
        assert is_support(G_DIAMOND)
        assert not is_support(diag([1, 2]))


class TestErrors:
    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            oplus(null(2), null(3))
        with pytest.raises(DimensionError):
            madd(null(2, 3), null(3, 2))
        with pytest.raises(DimensionError):
            otimes(null(2, 3), null(2, 3))
        with pytest.raises(DimensionError):
            leq(null(2), null(3))
        with pytest.raises(DimensionError):
            mp_power(null(2, 3), 2)
        with pytest.raises(DimensionError):
            phi(diag([1, 2]), G_DIAMOND, 1)

    def test_nan_and_posinf_rejected(self):
        with pytest.raises(ValueError):
            asmatrix([[np.nan]])
        with pytest.raises(ValueError):
            asmatrix([[np.inf]])


class TestLaws:
    @settings(max_examples=1000, deadline=None)
    @given(square_triples())
    def test_semiring_laws(self, mats):
        A, B, C = mats
        n = A.shape[0]
        tol = 1e-9
        assert mp_equal(oplus(A, B), oplus(B, A))
        assert mp_equal(oplus(oplus(A, B), C), oplus(A, oplus(B, C)))
        assert mp_equal(oplus(A, A), A)
        assert mp_equal(otimes(otimes(A, B), C), otimes(A, otimes(B, C)), tol)
        assert mp_equal(otimes(A, oplus(B, C)), oplus(otimes(A, B), otimes(A, C)), tol)
        assert mp_equal(otimes(oplus(A, B), C), oplus(otimes(A, C), otimes(B, C)), tol)
        assert mp_equal(otimes(identity(n), A), A)
        assert mp_equal(otimes(A, identity(n)), A)
        assert mp_equal(otimes(null(n), A), null(n))
        assert mp_equal(madd(madd(A, B), C), madd(A, madd(B, C)), tol)
        assert mp_equal(madd(A, B), madd(B, A))

    @settings(max_examples=300, deadline=None)
    @given(square_triples(), st.floats(0, 5), st.floats(0, 5))
    def test_monotonicity(self, mats, da, db):
        A, B, _ = mats
        A2, B2 = A + da, B + db
        assert leq(oplus(A, B), oplus(A2, B2))
        assert leq(otimes(A, B), otimes(A2, B2), 1e-9)
        assert leq(madd(A, B), madd(A2, B2), 1e-9)
