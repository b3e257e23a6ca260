"""Symmetric measurement families: SIC-POVMs, mutually unbiased bases and
equiangular measurements (EAMs).

Conventions
-----------
* Shift and clock: ``X|j> = |j+1 mod d>``, ``Z|j> = omega^j |j>`` with
  ``omega = exp(2 pi i / d)``.
* Weyl-Heisenberg displacements ``D_{p,q} = tau^(p q) X^p Z^q`` with
  ``tau = -exp(i pi / d)``.  SIC effects are ``D|f><f|D^dagger / d`` ordered
  by ``p * d + q``.
* MUBs are ordered basis-major.  Basis 0 is the computational basis; for prime
  ``d`` basis ``z + 1`` has vectors ``omega^(z j^2 + a j) / sqrt(d)`` (for
  ``d = 2`` the exponent is taken modulo 4 with ``omega = i`` and ``2 a j``).
  For ``d`` in {4, 8, 9} the bases are joint eigenbases of the commuting
  generalized-Pauli classes listed in ``_PAULI_SPREADS``.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .numkit import is_unitary

DEFAULT_TOL = 1e-9


class Kind(enum.Enum):
    SIC = "SIC"
    MUB_COMPLETE = "MUB_COMPLETE"
    MUB_SUBSET = "MUB_SUBSET"
    EAM = "EAM"


class FamilyError(ValueError):
    """A measurement family cannot be built or fails its defining conditions."""


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """A finite list of effect operators on a ``dim``-dimensional space.

    ``labels`` holds ``(basis, outcome)`` per effect for the MUB kinds and is
    ``None`` otherwise.
    """

    kind: Kind
    dim: int
    effects: np.ndarray
    labels: tuple[tuple[int, int], ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        effects = np.array(self.effects, dtype=complex)
        if effects.ndim != 3 or effects.shape[1:] != (self.dim, self.dim):
            raise FamilyError(f"effects of shape {effects.shape} do not match dim={self.dim}")
        effects.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        if self.kind in (Kind.MUB_COMPLETE, Kind.MUB_SUBSET):
            if self.labels is None or len(self.labels) != len(effects):
                raise FamilyError("MUB families need one (basis, outcome) label per effect")
            object.__setattr__(self, "labels", tuple(tuple(map(int, x)) for x in self.labels))

    @property
    def n(self) -> int:
        """Number of effects."""
        return self.effects.shape[0]

    @property
    def num_bases(self) -> int:
        if self.labels is None:
            return 1
        return len({b for b, _ in self.labels})

    def bases(self) -> list[list[int]]:
        """Effect indices grouped by basis (a single group for POVM kinds)."""
        if self.labels is None:
            return [list(range(self.n))]
        groups: dict[int, list[int]] = {}
        for i, (b, _) in enumerate(self.labels):
            groups.setdefault(b, []).append(i)
        return [groups[b] for b in sorted(groups)]


# ---------------------------------------------------------------------------
# Weyl-Heisenberg group and SICs


def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


def displacement(d: int, p: int, q: int) -> np.ndarray:
    X, Z = shift_clock(d)
    tau = -np.exp(1j * np.pi / d)
    return tau ** (p * q) * np.linalg.matrix_power(X, p) @ np.linalg.matrix_power(Z, q)


@lru_cache(maxsize=None)
def _fiducial_catalog() -> dict[int, np.ndarray]:
    text = resources.files("schmidtnum").joinpath("data/sic_fiducials.json").read_text()
    raw = json.loads(text)["fiducials"]
    out = {}
    for d, entries in raw.items():
        vals = [complex(*map(float, e.split())) for e in entries]
        out[int(d)] = np.array(vals)
    return out


def catalog_dimensions() -> list[int]:
    return sorted(_fiducial_catalog())


def sic_fiducial(d: int) -> np.ndarray:
    try:
        psi = _fiducial_catalog()[d]
    except KeyError:
        raise FamilyError(f"no SIC fiducial in the catalog for d={d}; supply one explicitly") from None
    return psi / np.linalg.norm(psi)


def sic_from_fiducial(fiducial, tol: float = DEFAULT_TOL) -> MeasurementFamily:
    """Weyl-Heisenberg orbit of ``fiducial``, verified as a SIC."""
    f = np.asarray(fiducial, dtype=complex).reshape(-1)
    d = f.size
    f = f / np.linalg.norm(f)
    vecs = [displacement(d, p, q) @ f for p in range(d) for q in range(d)]
    fam = MeasurementFamily(Kind.SIC, d, [np.outer(v, v.conj()) / d for v in vecs], name=f"WH-SIC d={d}")
    report = verify(fam, tol)
    if not report.passed:
        raise FamilyError(
            f"fiducial does not generate a SIC in d={d}: worst overlap deviation "
            f"{report.overlap_deviation:.3e}, completeness residual {report.completeness_residual:.3e}"
        )
    return fam


@lru_cache(maxsize=None)
def build_sic(d: int) -> MeasurementFamily:
    """SIC-POVM in dimension ``d`` from the built-in fiducial catalog."""
    return sic_from_fiducial(sic_fiducial(d))


# ---------------------------------------------------------------------------
# MUBs

# Generator exponent vectors (x_1..x_k, z_1..z_k) of each commuting class,
# found by tools/gen_mub_tables.py.  The first class is always Z-type.
_PAULI_SPREADS: dict[int, tuple[int, int, list]] = {
    4: (2, 2, [
        [(0, 0, 0, 1), (0, 0, 1, 0)], [(0, 1, 0, 0), (1, 0, 0, 0)], [(0, 1, 0, 1), (1, 0, 1, 0)],
        [(0, 1, 1, 0), (1, 0, 1, 1)], [(0, 1, 1, 1), (1, 0, 0, 1)],
    ]),
    8: (2, 3, [
        [(0, 0, 0, 0, 0, 1), (0, 0, 0, 0, 1, 0), (0, 0, 0, 1, 0, 0)],
        [(0, 0, 1, 0, 0, 0), (0, 1, 0, 0, 0, 0), (1, 0, 0, 0, 0, 0)],
        [(0, 0, 1, 0, 0, 1), (0, 1, 0, 0, 1, 0), (1, 0, 0, 1, 0, 0)],
        [(0, 0, 1, 0, 1, 0), (0, 1, 0, 1, 0, 1), (1, 0, 0, 1, 1, 0)],
        [(0, 0, 1, 0, 1, 1), (0, 1, 0, 1, 1, 1), (1, 0, 0, 0, 1, 0)],
        [(0, 0, 1, 1, 0, 0), (0, 1, 0, 1, 1, 0), (1, 0, 0, 1, 1, 1)],
        [(0, 0, 1, 1, 0, 1), (0, 1, 0, 1, 0, 0), (1, 0, 0, 0, 1, 1)],
        [(0, 0, 1, 1, 1, 0), (0, 1, 0, 0, 1, 1), (1, 0, 0, 0, 0, 1)],
        [(0, 0, 1, 1, 1, 1), (0, 1, 0, 0, 0, 1), (1, 0, 0, 1, 0, 1)],
    ]),
    9: (3, 2, [
        [(0, 0, 0, 1), (0, 0, 1, 0)], [(0, 1, 0, 0), (1, 0, 0, 0)], [(0, 1, 0, 1), (1, 0, 1, 0)],
        [(0, 1, 0, 2), (1, 0, 2, 0)], [(0, 1, 1, 0), (1, 0, 1, 1)], [(0, 1, 1, 1), (1, 0, 2, 1)],
        [(0, 1, 1, 2), (1, 0, 0, 1)], [(0, 1, 2, 0), (1, 0, 2, 2)], [(0, 1, 2, 1), (1, 0, 0, 2)],
        [(0, 1, 2, 2), (1, 0, 1, 2)],
    ]),
}


def _is_prime(d: int) -> bool:
    return d >= 2 and all(d % k for k in range(2, int(d**0.5) + 1))


def _pauli_operator(p: int, k: int, v: Sequence[int]) -> np.ndarray:
    X, Z = shift_clock(p)
    op = np.ones((1, 1), dtype=complex)
    for i in range(k):
        x, z = v[i], v[k + i]
        local = np.linalg.matrix_power(X, x) @ np.linalg.matrix_power(Z, z)
        if p == 2 and x and z:
            local = 1j * local  # Y, so qubit generators are Hermitian
        op = np.kron(op, local)
    return op


def _joint_eigenbasis(p: int, gens: list[np.ndarray]) -> np.ndarray:
    d = gens[0].shape[0]
    omega = np.exp(2j * np.pi / p)
    # Y = iXZ has eigenvalues +-1 = omega^s for p = 2, as do all qudit generators here
    vectors = []
    for signs in np.ndindex(*(p,) * len(gens)):
        proj = np.eye(d, dtype=complex)
        for g, s in zip(gens, signs):
            proj = proj @ sum(np.linalg.matrix_power(omega ** (-s) * g, t) for t in range(p)) / p
        col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
        vectors.append(col / np.linalg.norm(col))
    return np.array(vectors).T


@lru_cache(maxsize=None)
def _complete_mub_vectors(d: int) -> tuple[np.ndarray, ...]:
    """d+1 unitary matrices whose columns are the MUB vectors."""
    if d in _PAULI_SPREADS:
        p, k, classes = _PAULI_SPREADS[d]
        return tuple(_joint_eigenbasis(p, [_pauli_operator(p, k, v) for v in cls]) for cls in classes)
    if not _is_prime(d):
        raise FamilyError(f"no complete MUB construction for d={d} (prime d or d in {{4, 8, 9}})")
    j = np.arange(d)[:, None]
    a = np.arange(d)[None, :]
    bases = [np.eye(d, dtype=complex)]
    for z in range(d):
        if d == 2:
            bases.append(1j ** ((z * j * j + 2 * a * j) % 4) / np.sqrt(2))
        else:
            bases.append(np.exp(2j * np.pi * ((z * j * j + a * j) % d) / d) / np.sqrt(d))
    return tuple(bases)


def build_mubs(d: int, m: int | None = None, *, bases: Sequence[int] | None = None) -> MeasurementFamily:
    """``m`` mutually unbiased bases in dimension ``d`` (all ``d + 1`` by default).

    ``bases`` selects specific bases of the complete set by index instead of
    taking the first ``m``.
    """
    if bases is None:
        m = d + 1 if m is None else m
        if not 2 <= m <= d + 1:
            raise FamilyError(f"number of bases m={m} outside [2, {d + 1}]")
        bases = range(m)
    bases = [int(b) for b in bases]
    if len(set(bases)) != len(bases) or not 2 <= len(bases) <= d + 1 or not all(0 <= b <= d for b in bases):
        raise FamilyError(f"invalid basis selection {bases} for d={d}")
    complete = _complete_mub_vectors(d)
    effects, labels = [], []
    for l, b in enumerate(bases):
        for a in range(d):
            v = complete[b][:, a]
            effects.append(np.outer(v, v.conj()))
            labels.append((l, a))
    kind = Kind.MUB_COMPLETE if len(bases) == d + 1 else Kind.MUB_SUBSET
    return MeasurementFamily(kind, d, effects, tuple(labels), name=f"MUB d={d} bases={bases}")


# ---------------------------------------------------------------------------
# EAMs


def eam_from_vectors(vectors, tol: float = DEFAULT_TOL) -> MeasurementFamily:
    """EAM with effects ``(d/n)|psi_a><psi_a|`` from the rows of ``vectors``."""
    V = np.asarray(vectors, dtype=complex)
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    n, d = V.shape
    if n <= d:
        raise FamilyError(f"an EAM needs n > d vectors, got n={n}, d={d}")
    fam = MeasurementFamily(Kind.EAM, d, [d / n * np.outer(v, v.conj()) for v in V], name=f"EAM d={d} n={n}")
    report = verify(fam, tol)
    if not report.passed:
        raise FamilyError(f"vectors do not form an EAM: {report.failures()}")
    return fam


@lru_cache(maxsize=None)
def build_simplex_eam(d: int) -> MeasurementFamily:
    """The ``n = d + 1`` EAM formed by a regular real simplex."""
    if d < 2:
        raise FamilyError("simplex EAM needs d >= 2")
    n = d + 1
    # orthonormal basis of the hyperplane orthogonal to (1, ..., 1)
    Q, _ = np.linalg.qr(np.eye(n) - 1.0 / n)
    basis = Q[:, :d]
    vecs = (np.eye(n) - 1.0 / n) @ basis
    return eam_from_vectors(vecs)


def eam_overlap(d: int, n: int) -> float:
    """Squared overlap between distinct EAM vectors."""
    return (n - d) / (d * (n - 1))


# ---------------------------------------------------------------------------
# Transformations and verification


def conjugate_family(fam: MeasurementFamily, U) -> MeasurementFamily:
    """Family with every effect mapped to ``U E U^dagger``."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (fam.dim, fam.dim) or not is_unitary(U):
        raise FamilyError("conjugation requires a unitary of matching dimension")
    effects = U[None] @ fam.effects @ U.conj().T[None]
    return MeasurementFamily(fam.kind, fam.dim, effects, fam.labels, name=fam.name)


@dataclass(frozen=True)
class VerificationReport:
    kind: Kind
    completeness_residual: float
    overlap_deviation: float
    min_eigenvalue: float
    rank_one_deviation: float
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]


def verify(fam: MeasurementFamily, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check the defining conditions of ``fam`` and report residuals.

    Checks: every effect PSD; completeness (per basis for MUB kinds);
    each effect a rank-one operator with the expected trace; pairwise
    overlaps ``|<psi_j|psi_k>|^2`` equal to the kind's constant.
    """
    d, n, E = fam.dim, fam.n, fam.effects
    herm = (E + np.conj(np.transpose(E, (0, 2, 1)))) / 2
    min_eig = float(np.min(np.linalg.eigvalsh(herm)))
    eye = np.eye(d)

    if fam.kind in (Kind.SIC, Kind.EAM):
        groups = [list(range(n))]
        trace_target = d / n
    else:
        groups = fam.bases()
        trace_target = 1.0
    completeness = max(float(np.max(np.abs(E[g].sum(axis=0) - eye))) for g in groups)

    traces = np.einsum("iaa->i", E).real
    purities = np.einsum("iab,iba->i", E, E).real
    rank_one = float(max(np.max(np.abs(traces - trace_target)), np.max(np.abs(purities - traces**2))))

    # |<psi_j|psi_k>|^2 = tr(E_j E_k) / (tr E_j tr E_k) for rank-one effects
    gram = np.einsum("iab,jba->ij", E, E).real / np.outer(traces, traces)
    if fam.kind is Kind.SIC:
        expected = np.full((n, n), 1.0 / (d + 1))
    elif fam.kind is Kind.EAM:
        expected = np.full((n, n), eam_overlap(d, n))
    else:
        b = np.array([lab[0] for lab in fam.labels])
        expected = np.where(b[:, None] == b[None, :], 0.0, 1.0 / d)
    np.fill_diagonal(expected, 1.0)
    overlap = float(np.max(np.abs(gram - expected)))

    checks = {
        "psd": min_eig >= -tol,
        "completeness": completeness <= tol,
        "rank_one": rank_one <= tol,
        "overlap": overlap <= tol,
    }
    if fam.kind is Kind.SIC:
        checks["count"] = n == d * d
    elif fam.kind is Kind.MUB_COMPLETE:
        checks["count"] = n == d * (d + 1) and fam.num_bases == d + 1
    elif fam.kind is Kind.MUB_SUBSET:
        checks["count"] = n == d * fam.num_bases and 2 <= fam.num_bases <= d + 1
    else:
        checks["count"] = n > d
    return VerificationReport(fam.kind, completeness, overlap, min_eig, rank_one, checks)


# ---------------------------------------------------------------------------
# MEAS-1 text format

_HEADER = re.compile(r"^MEAS-1\s+(\S+)\s+d=(\d+)\s+n=(\d+)(?:\s+m=(\d+))?\s*$")
_EFFECT = re.compile(r"^effect\s+(\d+)(?:\s+basis=(\d+)\s+outcome=(\d+))?\s*$")


def write_meas(fam: MeasurementFamily, path) -> None:
    lines = [f"MEAS-1 {fam.kind.value} d={fam.dim} n={fam.n}"]
    if fam.labels is not None:
        lines[0] += f" m={fam.num_bases}"
    for i, E in enumerate(fam.effects):
        head = f"effect {i}"
        if fam.labels is not None:
            head += f" basis={fam.labels[i][0]} outcome={fam.labels[i][1]}"
        lines.append(head)
        for row in E:
            lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_meas(path, tol: float = DEFAULT_TOL, check: bool = True) -> MeasurementFamily:
    """Parse a MEAS-1 file; with ``check`` the family must pass :func:`verify`."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FamilyError(f"{path}: empty MEAS-1 file")
    mh = _HEADER.match(lines[0])
    if not mh:
        raise FamilyError(f"{path}: malformed MEAS-1 header {lines[0]!r}")
    try:
        kind = Kind(mh.group(1))
    except ValueError:
        raise FamilyError(f"{path}: unknown kind {mh.group(1)!r}") from None
    d, n = int(mh.group(2)), int(mh.group(3))
    effects, labels = [], []
    pos = 1
    for i in range(n):
        me = _EFFECT.match(lines[pos]) if pos < len(lines) else None
        if not me or int(me.group(1)) != i:
            raise FamilyError(f"{path}: expected 'effect {i}' block at line {pos + 1}")
        if me.group(2) is not None:
            labels.append((int(me.group(2)), int(me.group(3))))
        rows = []
        for row in lines[pos + 1 : pos + 1 + d]:
            try:
                nums = [float(x) for x in row.split()]
            except ValueError:
                raise FamilyError(f"{path}: non-numeric entry in effect {i}") from None
            if len(nums) != 2 * d:
                raise FamilyError(f"{path}: effect {i} row has {len(nums)} numbers, expected {2 * d}")
            rows.append(np.array(nums[0::2]) + 1j * np.array(nums[1::2]))
        if len(rows) != d:
            raise FamilyError(f"{path}: effect {i} is truncated")
        effects.append(np.array(rows))
        pos += 1 + d
    if pos != len(lines):
        raise FamilyError(f"{path}: trailing content after {n} effects")
    if kind in (Kind.MUB_COMPLETE, Kind.MUB_SUBSET) and len(labels) != n:
        raise FamilyError(f"{path}: MUB effects need basis/outcome labels")
    fam = MeasurementFamily(kind, d, np.array(effects), tuple(labels) if labels else None, name=str(path))
    if mh.group(4) is not None and fam.num_bases != int(mh.group(4)):
        raise FamilyError(f"{path}: header says m={mh.group(4)} but found {fam.num_bases} bases")
    if check:
        report = verify(fam, tol)
        if not report.passed:
            raise FamilyError(f"{path}: family fails verification ({', '.join(report.failures())})")
    return fam
