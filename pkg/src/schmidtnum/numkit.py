"""Dense complex linear algebra used by the Schmidt-number criteria.

Matrices are plain ``numpy`` arrays throughout.  Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import unitary_group

#: Singular values below this fraction of the largest one are treated as zero.
SVD_RTOL = 1e-12


class DimensionError(ValueError):
    """Raised when array shapes do not match the requested local dimensions."""


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"expected a non-empty 2-d array, got shape {M.shape}")
    return M


def singular_values(M) -> np.ndarray:
    """Singular values of ``M`` in descending order, tiny ones clamped to zero."""
    s = np.linalg.svd(_as_matrix(M), compute_uv=False)
    if s.size and s[0] > 0:
        s[s < SVD_RTOL * s[0]] = 0.0
    return s


def trace_norm(M) -> float:
    """Trace norm ``tr sqrt(M^dagger M)``, i.e. the sum of singular values."""
    return float(np.sum(singular_values(M)))


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A), np.asarray(B))


def _check_bipartite(rho, dA: int, dB: int) -> np.ndarray:
    rho = _as_matrix(rho)
    if rho.shape != (dA * dB, dA * dB):
        raise DimensionError(f"operator of shape {rho.shape} does not act on {dA}x{dB}")
    return rho


def partial_trace(rho, dA: int, dB: int, keep: Literal["A", "B"] = "A") -> np.ndarray:
    """Reduced operator on subsystem ``keep`` of a ``dA*dB`` square matrix."""
    t = _check_bipartite(rho, dA, dB).reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def realign(rho, dA: int, dB: int) -> np.ndarray:
    """Realigned matrix with ``R[(i,j),(k,l)] = rho[(i,k),(j,l)]``.

    Its trace norm equals that of the correlation matrix in any pair of
    orthonormal Hermitian operator bases.
    """
    t = _check_bipartite(rho, dA, dB).reshape(dA, dB, dA, dB)
    return t.transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)


def unrealign(R, dA: int, dB: int) -> np.ndarray:
    """Inverse of :func:`realign`."""
    R = _as_matrix(R)
    if R.shape != (dA * dA, dB * dB):
        raise DimensionError(f"realigned matrix of shape {R.shape} does not match {dA}x{dB}")
    return R.reshape(dA, dA, dB, dB).transpose(0, 2, 1, 3).reshape(dA * dB, dA * dB)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``psi = sum_s coefficients[s] * left[:, s] (x) right[:, s]``."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    def vector(self) -> np.ndarray:
        return np.einsum("s,as,bs->ab", self.coefficients, self.left, self.right).reshape(-1)


def schmidt_decompose(psi, dA: int, dB: int, tol: float = 1e-10) -> SchmidtDecomposition:
    """Schmidt decomposition of a unit vector via SVD of its coefficient matrix.

    Coefficients not exceeding ``tol`` are dropped.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != dA * dB:
        raise DimensionError(f"vector of length {psi.size} does not live in {dA}x{dB}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"vector is not normalised (norm {norm!r})")
    U, s, Vh = np.linalg.svd(psi.reshape(dA, dB), full_matrices=False)
    keep = s > tol
    return SchmidtDecomposition(s[keep], U[:, keep], Vh[keep].T)


def schmidt_truncate(psi, dA: int, dB: int, r: int) -> np.ndarray:
    """Closest vector of Schmidt rank at most ``r``, renormalised."""
    U, s, Vh = np.linalg.svd(np.asarray(psi).reshape(dA, dB), full_matrices=False)
    out = (U[:, :r] * s[:r]) @ Vh[:r]
    return out.reshape(-1) / np.linalg.norm(out)


def is_hermitian(M, tol: float = 1e-10) -> bool:
    M = _as_matrix(M)
    return M.shape[0] == M.shape[1] and bool(np.max(np.abs(M - M.conj().T)) <= tol)


def is_psd(M, tol: float = 1e-10) -> bool:
    if not is_hermitian(M, tol):
        return False
    return bool(np.linalg.eigvalsh((M + M.conj().T) / 2)[0] >= -tol)


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = _as_matrix(U)
    if U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def random_unitary(d: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar-random ``d x d`` unitary."""
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(d, random_state=np.random.default_rng(rng))


def polar_unitary(M) -> np.ndarray:
    """Unitary factor ``W`` of the polar decomposition ``M = W P``."""
    U, _, Vh = np.linalg.svd(_as_matrix(M))
    return U @ Vh
