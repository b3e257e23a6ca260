"""Bipartite density matrices used as test subjects: noise families, maximally
entangled states, fixed-Schmidt-coefficient pure states and random states.

Random instances use ``numpy.random.default_rng`` (PCG64, 64-bit state), so a
given seed reproduces the same matrix across platforms.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numkit import is_unitary, schmidt_decompose

STATE_TOL = 1e-10


class StateError(ValueError):
    """Matrix is not a valid bipartite density matrix, or builder input is invalid."""


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density matrix ``rho`` on ``C^dA (x) C^dB``."""

    rho: np.ndarray
    dA: int
    dB: int

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        D = self.dA * self.dB
        if rho.shape != (D, D):
            raise StateError(f"rho has shape {rho.shape}, expected {(D, D)} for dA={self.dA}, dB={self.dB}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > STATE_TOL:
            raise StateError(f"rho is not Hermitian (max asymmetry {herm:.3e})")
        tr = np.trace(rho).real
        if abs(tr - 1) > STATE_TOL:
            raise StateError(f"rho has trace {tr!r}")
        lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
        if lam < -STATE_TOL:
            raise StateError(f"rho has negative eigenvalue {lam:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    @classmethod
    def from_vector(cls, psi, dA: int, dB: int) -> "BipartiteState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dA, dB)

    def mix(self, other: "BipartiteState", t: float) -> "BipartiteState":
        """``t * self + (1 - t) * other``."""
        return BipartiteState(t * self.rho + (1 - t) * other.rho, self.dA, self.dB)


def phi_plus(d: int) -> np.ndarray:
    """The vector ``sum_i |ii> / sqrt(d)``."""
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1 / np.sqrt(d)
    return psi


def max_entangled(d: int, U=None) -> BipartiteState:
    """``(1 (x) U)|phi+>`` as a density matrix."""
    if d < 2:
        raise StateError("d must be at least 2")
    psi = phi_plus(d)
    if U is not None:
        U = np.asarray(U, dtype=complex)
        if U.shape != (d, d) or not is_unitary(U):
            raise StateError("U must be a d x d unitary")
        psi = np.kron(np.eye(d), U) @ psi
    return BipartiteState.from_vector(psi, d, d)


def _check_unit_interval(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise StateError(f"{name}={x} outside [0, 1]")


def isotropic(d: int, v: float) -> BipartiteState:
    """``v |phi+><phi+| + (1 - v) 1 / d^2``."""
    _check_unit_interval("v", v)
    phi = phi_plus(d)
    return BipartiteState(v * np.outer(phi, phi.conj()) + (1 - v) * np.eye(d * d) / d**2, d, d)


def dephased(d: int, u: float) -> BipartiteState:
    """``u |phi+><phi+| + (1 - u)/d sum_i |ii><ii|``."""
    _check_unit_interval("u", u)
    phi = phi_plus(d)
    diag = np.zeros(d * d)
    diag[:: d + 1] = 1 / d
    return BipartiteState(u * np.outer(phi, phi.conj()) + (1 - u) * np.diag(diag), d, d)


class RhoQReading(enum.Enum):
    """Ways to read the admixed operator in the two-qutrit ``rho(q)`` family.

    ``PRODUCT_01``      ``|01><01|`` (default; gives F(rho) = q exactly)
    ``PRODUCT_10``      ``|10><10|``
    ``SYMMETRIC``       ``(|01><01| + |10><10|) / 2``
    ``LITERAL``         ``|00><11|`` taken verbatim; not Hermitian, always rejected for q < 1
    """

    PRODUCT_01 = "PRODUCT_01"
    PRODUCT_10 = "PRODUCT_10"
    SYMMETRIC = "SYMMETRIC"
    LITERAL = "LITERAL"


def _ket(d: int, *idx: int) -> np.ndarray:
    v = np.zeros(d ** len(idx), dtype=complex)
    v[int(np.ravel_multi_index(idx, (d,) * len(idx)))] = 1
    return v


def rho_q(q: float, reading: RhoQReading | str = RhoQReading.PRODUCT_01) -> BipartiteState:
    """Two-qutrit family ``q |phi+><phi+| + (1 - q) X`` for the admixture ``X`` of ``reading``."""
    _check_unit_interval("q", q)
    reading = RhoQReading(reading)
    k01, k10, k00, k11 = _ket(3, 0, 1), _ket(3, 1, 0), _ket(3, 0, 0), _ket(3, 1, 1)
    if reading is RhoQReading.PRODUCT_01:
        X = np.outer(k01, k01)
    elif reading is RhoQReading.PRODUCT_10:
        X = np.outer(k10, k10)
    elif reading is RhoQReading.SYMMETRIC:
        X = (np.outer(k01, k01) + np.outer(k10, k10)) / 2
    else:
        X = np.outer(k00, k11)
    phi = phi_plus(3)
    rho = q * np.outer(phi, phi.conj()) + (1 - q) * X
    try:
        return BipartiteState(rho, 3, 3)
    except StateError as exc:
        raise StateError(f"rho(q={q}) with reading {reading.value} is not a state: {exc}") from None


def pure_schmidt(coefficients, UA=None, UB=None, dA: int | None = None, dB: int | None = None) -> BipartiteState:
    """``(UA (x) UB) sum_s c_s |ss>`` for Schmidt coefficients ``c``.

    Local dimensions default to the unitaries' sizes, else to ``len(c)``.
    """
    c = np.asarray(coefficients, dtype=float).reshape(-1)
    if np.any(c <= 0):
        raise StateError("Schmidt coefficients must be positive")
    if abs(np.sum(c**2) - 1) > 1e-10:
        raise StateError(f"Schmidt coefficients are not normalised (sum of squares {np.sum(c**2)!r})")
    dA = dA or (np.shape(UA)[0] if UA is not None else c.size)
    dB = dB or (np.shape(UB)[0] if UB is not None else c.size)
    if c.size > min(dA, dB):
        raise StateError(f"{c.size} Schmidt coefficients do not fit in {dA}x{dB}")
    M = np.zeros((dA, dB), dtype=complex)
    M[np.arange(c.size), np.arange(c.size)] = c
    if UA is not None:
        M = np.asarray(UA) @ M
    if UB is not None:
        M = M @ np.asarray(UB).T
    return BipartiteState.from_vector(M.reshape(-1), dA, dB)


def random_pure_schmidt_vector(dA: int, dB: int, r: int, rng) -> np.ndarray:
    """Random unit vector of Schmidt rank exactly ``r`` (almost surely)."""
    rng = np.random.default_rng(rng)
    A = rng.normal(size=(dA, r)) + 1j * rng.normal(size=(dA, r))
    B = rng.normal(size=(dB, r)) + 1j * rng.normal(size=(dB, r))
    psi = (A @ B.T).reshape(-1)
    return psi / np.linalg.norm(psi)


def random_state(dA: int, dB: int, rank: int | None = None, seed=None) -> BipartiteState:
    """Ginibre-type random state ``L L^dagger / tr(L L^dagger)`` with ``L`` of width ``rank``."""
    D = dA * dB
    rank = D if rank is None else rank
    if not 1 <= rank <= D:
        raise StateError(f"rank={rank} outside [1, {D}]")
    rng = np.random.default_rng(seed)
    L = rng.normal(size=(D, rank)) + 1j * rng.normal(size=(D, rank))
    rho = L @ L.conj().T
    rho = (rho + rho.conj().T) / 2
    return BipartiteState(rho / np.trace(rho).real, dA, dB)


def random_product_state(dA: int, dB: int, seed=None) -> BipartiteState:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=dA) + 1j * rng.normal(size=dA)
    b = rng.normal(size=dB) + 1j * rng.normal(size=dB)
    return BipartiteState.from_vector(np.kron(a, b), dA, dB)


def schmidt_coefficients(state: BipartiteState, tol: float = 1e-10) -> np.ndarray:
    """Schmidt coefficients of a pure ``state``."""
    w, V = np.linalg.eigh(state.rho)
    if w[-2:-1].size and w[-2] > tol:
        raise StateError("state is not pure")
    return schmidt_decompose(V[:, -1], state.dA, state.dB, tol).coefficients


# ---------------------------------------------------------------------------
# QST-1 text format

_QST_HEADER = re.compile(r"^QST-1\s+dA=(\d+)\s+dB=(\d+)\s*$")


def write_qst(state: BipartiteState, path) -> None:
    lines = [f"QST-1 dA={state.dA} dB={state.dB}"]
    for row in state.rho:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_qst(path) -> BipartiteState:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise StateError(f"{path}: empty QST-1 file")
    m = _QST_HEADER.match(lines[0])
    if not m:
        raise StateError(f"{path}: malformed QST-1 header {lines[0]!r}")
    dA, dB = int(m.group(1)), int(m.group(2))
    D = dA * dB
    if len(lines) != D + 1:
        raise StateError(f"{path}: expected {D} matrix rows, found {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:]):
        try:
            nums = [float(x) for x in ln.split()]
        except ValueError:
            raise StateError(f"{path}: non-numeric entry in row {k}") from None
        if len(nums) != 2 * D:
            raise StateError(f"{path}: row {k} has {len(nums)} numbers, expected {2 * D}")
        rows.append(np.array(nums[0::2]) + 1j * np.array(nums[1::2]))
    return BipartiteState(np.array(rows), dA, dB)
