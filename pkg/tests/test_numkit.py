import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schmidtnum.numkit import (
    DimensionError,
    kron,
    partial_trace,
    random_unitary,
    realign,
    schmidt_decompose,
    schmidt_truncate,
    singular_values,
    trace_norm,
    unrealign,
)
from schmidtnum.states import phi_plus, random_state

from conftest import random_matrix

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def realign_bruteforce(rho, dA, dB):
    R = np.zeros((dA * dA, dB * dB), dtype=complex)
    for i in range(dA):
        for j in range(dA):
            for k in range(dB):
                for l in range(dB):
                    R[i * dA + j, k * dB + l] = rho[i * dB + k, j * dB + l]
    return R


class TestSingularValues:
    def test_identity(self):
        np.testing.assert_allclose(singular_values(np.eye(2)), [1, 1])

    def test_nilpotent_shift(self):
        np.testing.assert_allclose(singular_values([[0, 1], [0, 0]]), [1, 0])

    def test_matches_eigenvalues_of_gram(self, rng):
        M = random_matrix(rng, 5, 3)
        expected = np.sqrt(np.sort(np.linalg.eigvalsh(M.conj().T @ M))[::-1])
        s = singular_values(M)
        assert s.size == 3
        np.testing.assert_allclose(s, expected, atol=1e-9)

    def test_empty_matrix_rejected(self):
        with pytest.raises(DimensionError):
            singular_values(np.zeros((0, 3)))


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(3)) == pytest.approx(3)

    def test_hermitian_absolute_eigenvalues(self):
        assert trace_norm(np.diag([2, -1])) == pytest.approx(3)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_uniform_rank_one(self, d):
        assert trace_norm(np.full((d * d, d * d), 1 / d**4)) == pytest.approx(1 / d**2)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        M = random_matrix(rng, 4, 4)
        U, V = random_unitary(4, rng), random_unitary(4, rng)
        assert trace_norm(U @ M @ V) == pytest.approx(trace_norm(M), abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        A, B = random_matrix(rng, 3, 5), random_matrix(rng, 3, 5)
        assert trace_norm(A + B) <= trace_norm(A) + trace_norm(B) + 1e-12


class TestKron:
    def test_identities(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_trace_factorises(self, rng):
        A, B = random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)
        assert np.trace(kron(A, B)) == pytest.approx(np.trace(A) * np.trace(B))

    def test_basis_projectors(self):
        e0, e1 = np.diag([1, 0]), np.diag([0, 1])
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        np.testing.assert_array_equal(kron(e0, e1), expected)


class TestPartialTrace:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_maximally_entangled_reduction(self, d):
        phi = phi_plus(d)
        np.testing.assert_allclose(partial_trace(np.outer(phi, phi.conj()), d, d, "A"), np.eye(d) / d, atol=1e-12)

    def test_product_state(self):
        ra = random_state(2, 1, seed=1).rho
        rb = random_state(3, 1, seed=2).rho
        np.testing.assert_allclose(partial_trace(np.kron(ra, rb), 2, 3, "A"), ra, atol=1e-12)
        np.testing.assert_allclose(partial_trace(np.kron(ra, rb), 2, 3, "B"), rb, atol=1e-12)

    def test_trace_preserved(self):
        rho = random_state(2, 3, seed=3).rho
        for keep in "AB":
            assert np.trace(partial_trace(rho, 2, 3, keep)).real == pytest.approx(1, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(6), 2, 2)


class TestRealign:
    def test_matches_bruteforce(self):
        rho = random_state(2, 3, seed=4).rho
        np.testing.assert_allclose(realign(rho, 2, 3), realign_bruteforce(rho, 2, 3))

    def test_bell_state(self):
        phi = phi_plus(2)
        R = realign_bruteforce(np.outer(phi, phi), 2, 2)
        assert trace_norm(R) == pytest.approx(2)
        assert trace_norm(realign(np.outer(phi, phi), 2, 2)) == pytest.approx(2)

    def test_maximally_mixed(self):
        R = realign(np.eye(9) / 9, 3, 3)
        np.testing.assert_allclose(R, realign_bruteforce(np.eye(9) / 9, 3, 3))
        assert trace_norm(R) == pytest.approx(1 / 3)

    def test_product_pure_state(self):
        a = random_state(3, 1, rank=1, seed=5).rho
        b = random_state(2, 1, rank=1, seed=6).rho
        assert trace_norm(realign_bruteforce(np.kron(a, b), 3, 2)) == pytest.approx(1)
        assert trace_norm(realign(np.kron(a, b), 3, 2)) == pytest.approx(1)

    @settings(max_examples=20, deadline=None)
    @given(seeds, st.integers(1, 4), st.integers(1, 4))
    def test_inverse(self, seed, dA, dB):
        rho = random_matrix(np.random.default_rng(seed), dA * dB, dA * dB)
        np.testing.assert_array_equal(unrealign(realign(rho, dA, dB), dA, dB), rho)


class TestSchmidt:
    def test_product(self):
        dec = schmidt_decompose(np.array([1, 0, 0, 0]), 2, 2)
        np.testing.assert_allclose(dec.coefficients, [1])

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_maximally_entangled(self, d):
        dec = schmidt_decompose(phi_plus(d), d, d)
        np.testing.assert_allclose(dec.coefficients, np.full(d, 1 / np.sqrt(d)))

    def test_round_trip(self, rng):
        lam = np.sort(rng.uniform(0.1, 1, size=3))[::-1]
        lam /= np.linalg.norm(lam)
        UA, UB = random_unitary(4, rng), random_unitary(5, rng)
        M = np.zeros((4, 5), dtype=complex)
        M[range(3), range(3)] = lam
        psi = (UA @ M @ UB.T).reshape(-1)
        dec = schmidt_decompose(psi, 4, 5)
        np.testing.assert_allclose(dec.coefficients, lam, atol=1e-9)
        np.testing.assert_allclose(dec.vector(), psi, atol=1e-10)
        assert np.sum(dec.coefficients**2) == pytest.approx(1, abs=1e-10)

    def test_unnormalised_rejected(self):
        with pytest.raises(ValueError):
            schmidt_decompose(np.array([1, 1, 0, 0]), 2, 2)

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.integers(1, 3))
    def test_rank_matches_coefficient_matrix(self, seed, r):
        rng = np.random.default_rng(seed)
        psi = (random_matrix(rng, 3, r) @ random_matrix(rng, r, 4)).reshape(-1)
        psi /= np.linalg.norm(psi)
        dec = schmidt_decompose(psi, 3, 4)
        assert dec.rank == np.linalg.matrix_rank(psi.reshape(3, 4), tol=1e-10) == r

    def test_truncation(self, rng):
        psi = random_matrix(rng, 3, 3).reshape(-1)
        out = schmidt_truncate(psi / np.linalg.norm(psi), 3, 3, 2)
        assert schmidt_decompose(out, 3, 3).rank == 2
