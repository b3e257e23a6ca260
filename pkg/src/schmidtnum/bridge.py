"""Transfer from a complete set of MUBs to a candidate SIC, and the resulting
equivalence ``||Q||_tr = K ||P||_tr`` between the MUB and SIC criteria.

Incidence labelling (prime ``d``): row ``x * d + y`` is the set taking
outcome ``x`` of the computational basis and outcome ``(y + z x) mod d`` of
basis ``z + 1``; columns follow the basis-major effect order of
:func:`schmidtnum.measurements.build_mubs`.  Any two rows meet in exactly one
column, as lines of the affine plane over ``Z_d`` do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import born_table, sic_constant
from .measurements import FamilyError, Kind, MeasurementFamily, _is_prime, verify
from .numkit import trace_norm
from .states import BipartiteState

POSITIVITY_TOL = 1e-10


def build_incidence(d: int) -> np.ndarray:
    """``d^2 x d(d+1)`` 0/1 matrix of rows of weight ``d+1`` meeting pairwise once."""
    if not _is_prime(d):
        raise FamilyError(f"incidence structure is only built for prime d, got {d}")
    M = np.zeros((d * d, d * (d + 1)), dtype=int)
    for x in range(d):
        for y in range(d):
            row = x * d + y
            M[row, x] = 1
            for z in range(d):
                M[row, (z + 1) * d + (y + z * x) % d] = 1
    return M


@dataclass(frozen=True, eq=False)
class ThetaOperator:
    theta: np.ndarray
    incidence: np.ndarray
    d: int


def build_theta(d: int) -> ThetaOperator:
    """``M / (d sqrt(d+1)) + (1 - sqrt(d+1)) / (d^2 (d+1)) J`` with ``J`` all-ones."""
    M = build_incidence(d)
    s = math.sqrt(d + 1)
    theta = M / (d * s) + (1 - s) / (d * d * (d + 1)) * np.ones(M.shape)
    return ThetaOperator(theta, M, d)


@dataclass(frozen=True, eq=False)
class CandidateSic:
    """Effects ``E_i = sum_j theta_ij G_j``; ``family`` is set only if they form a SIC."""

    effects: np.ndarray
    min_eigenvalue: float
    family: MeasurementFamily | None

    @property
    def is_sic(self) -> bool:
        return self.family is not None


def theta_to_candidate_sic(mubs: MeasurementFamily, theta: ThetaOperator) -> CandidateSic:
    if mubs.kind is not Kind.MUB_COMPLETE:
        raise FamilyError("the transfer needs a complete set of MUBs")
    if mubs.dim != theta.d:
        raise FamilyError(f"MUBs of dimension {mubs.dim} do not match theta for d={theta.d}")
    effects = np.einsum("ij,jab->iab", theta.theta, mubs.effects)
    herm = (effects + np.conj(np.transpose(effects, (0, 2, 1)))) / 2
    min_eig = float(np.min(np.linalg.eigvalsh(herm)))
    family = None
    if min_eig >= -POSITIVITY_TOL:
        fam = MeasurementFamily(Kind.SIC, mubs.dim, effects, name=f"theta-SIC d={mubs.dim}")
        if verify(fam).passed:
            family = fam
    return CandidateSic(effects, min_eig, family)


@dataclass(frozen=True)
class Equivalence:
    q_norm: float
    kp_norm: float

    @property
    def gap(self) -> float:
        return abs(self.q_norm - self.kp_norm)


def _effects(fam) -> np.ndarray:
    return fam.effects if isinstance(fam, (MeasurementFamily, CandidateSic)) else np.asarray(fam)


def check_equivalence(state: BipartiteState, mubs_a: MeasurementFamily, mubs_b: MeasurementFamily,
                      sic_a, sic_b) -> Equivalence:
    """Compare ``||Q||_tr`` with ``K ||P||_tr``.

    ``sic_a``/``sic_b`` may be SIC families, candidates from
    :func:`theta_to_candidate_sic` (even non-positive ones) or raw effect arrays.
    """
    for fam in (mubs_a, mubs_b):
        if fam.kind is not Kind.MUB_COMPLETE:
            raise FamilyError("equivalence check needs complete MUB sets")
    ea, eb = _effects(sic_a), _effects(sic_b)
    if (mubs_a.dim, mubs_b.dim) != (state.dA, state.dB) or ea.shape[1:] != (state.dA, state.dA) \
            or eb.shape[1:] != (state.dB, state.dB):
        raise FamilyError("family dimensions do not match the state")
    Q = born_table(state.rho, mubs_a.effects, mubs_b.effects, state.dA, state.dB)
    P = born_table(state.rho, ea, eb, state.dA, state.dB)
    return Equivalence(trace_norm(Q), sic_constant(state.dA, state.dB) * trace_norm(P))
