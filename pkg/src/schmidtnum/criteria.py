"""Schmidt-number criteria built on correlation-matrix trace norms.

Every criterion has the form ``value <= bound(r)`` for all states of Schmidt
number at most ``r``; a state whose value exceeds ``bound(r) + eps`` therefore
has Schmidt number at least ``r + 1``.

=============  =====================  ==========================================
criterion      value                  bound(r)
=============  =====================  ==========================================
fidelity       ``F``                  ``r / d``
ccnr           ``||C||_tr``           ``r``
sic            ``K ||P||_tr``         ``1 + r``
mub            ``||Q||_tr``           ``1 + r``
eam            ``||P_n||_tr``         ``(n - d + d(d-1) r) / (n(n-1))``
mub subset     ``||Q_m||_tr``         ``(m - 1)/d + r``
=============  =====================  ==========================================

with ``K = sqrt(dA(dA+1)) sqrt(dB(dB+1))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measurements import (
    FamilyError,
    Kind,
    MeasurementFamily,
    build_mubs,
    build_sic,
    catalog_dimensions,
)
from .numkit import DimensionError, polar_unitary, random_unitary, realign, trace_norm
from .states import BipartiteState, phi_plus

#: Margin by which a value must exceed a bound before it certifies anything.
CERTIFY_EPS = 1e-9
#: Largest tolerated imaginary part of a Born-rule probability.
IMAG_TOL = 1e-8


class CorrelationKind(enum.Enum):
    SIC_P = "SIC_P"
    MUB_Q = "MUB_Q"
    MUB_SUBSET_Qm = "MUB_SUBSET_Qm"
    EAM_Pn = "EAM_Pn"


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    table: np.ndarray
    fam_a: MeasurementFamily
    fam_b: MeasurementFamily
    kind: CorrelationKind

    def trace_norm(self) -> float:
        return trace_norm(self.table)

    def check(self, tol: float = 1e-9) -> list[str]:
        """Violated table invariants (empty if none)."""
        problems = []
        T = self.table
        if T.min() < -tol or T.max() > 1 + 1e-12:
            problems.append(f"entries outside [0, 1]: min {T.min():.3e}, max {T.max():.3e}")
        for ga in self.fam_a.bases():
            for gb in self.fam_b.bases():
                s = T[np.ix_(ga, gb)].sum()
                if abs(s - 1) > tol:
                    problems.append(f"block sum {s!r} != 1")
        return problems


class CriterionError(ValueError):
    """Criterion cannot be evaluated for the given state and families."""


def born_table(rho, effects_a, effects_b, dA: int, dB: int) -> np.ndarray:
    """``tr(rho E_i (x) F_j)`` for arbitrary operator lists; real part only.

    Raises if an imaginary part above ``IMAG_TOL`` appears.
    """
    r4 = np.asarray(rho).reshape(dA, dB, dA, dB)
    T = np.einsum("xyzw,izx,jwy->ij", r4, np.asarray(effects_a), np.asarray(effects_b), optimize=True)
    worst = float(np.max(np.abs(T.imag))) if T.size else 0.0
    if worst > IMAG_TOL:
        raise CriterionError(
            f"probability table has imaginary residue {worst:.3e}; "
            f"largest at index {np.unravel_index(np.argmax(np.abs(T.imag)), T.shape)}"
        )
    return T.real


def _pair_kind(fa: MeasurementFamily, fb: MeasurementFamily) -> CorrelationKind:
    mub = (Kind.MUB_COMPLETE, Kind.MUB_SUBSET)
    if fa.kind is Kind.SIC and fb.kind is Kind.SIC:
        return CorrelationKind.SIC_P
    if fa.kind in mub and fb.kind in mub:
        if fa.kind is fb.kind is Kind.MUB_COMPLETE:
            return CorrelationKind.MUB_Q
        return CorrelationKind.MUB_SUBSET_Qm
    if fa.kind is Kind.EAM and fb.kind is Kind.EAM:
        return CorrelationKind.EAM_Pn
    raise CriterionError(f"incompatible family kinds {fa.kind.value} and {fb.kind.value}")


def correlation_matrix(state: BipartiteState, fam_a: MeasurementFamily, fam_b: MeasurementFamily) -> CorrelationMatrix:
    """Joint outcome probabilities ``tr(rho E^A_i (x) E^B_j)``."""
    if fam_a.dim != state.dA or fam_b.dim != state.dB:
        raise DimensionError(
            f"families of dimension ({fam_a.dim}, {fam_b.dim}) do not match state ({state.dA}, {state.dB})"
        )
    kind = _pair_kind(fam_a, fam_b)
    return CorrelationMatrix(born_table(state.rho, fam_a.effects, fam_b.effects, state.dA, state.dB), fam_a, fam_b, kind)


def as_eam(fam: MeasurementFamily) -> MeasurementFamily:
    """View a SIC as the ``n = d^2`` equiangular measurement."""
    if fam.kind is Kind.EAM:
        return fam
    if fam.kind is not Kind.SIC:
        raise FamilyError(f"{fam.kind.value} family is not equiangular")
    return MeasurementFamily(Kind.EAM, fam.dim, fam.effects, name=fam.name)


# ---------------------------------------------------------------------------
# Bounds


def sic_constant(dA: int, dB: int) -> float:
    """``K = sqrt(dA (dA+1)) sqrt(dB (dB+1))``."""
    return math.sqrt(dA * (dA + 1)) * math.sqrt(dB * (dB + 1))


def eam_proven_bound(d: int, n: int, r: int) -> float:
    return (n - d + d * (d - 1) * r) / (n * (n - 1))


def eam_conjectured_bound(d: int, n: int, r: int) -> float:
    return (d * (d - 1) + r * (n - d)) / (n * (n - 1))


def mub_subset_proven_bound(d: int, m: int, r: int) -> float:
    return (m - 1) / d + r


def mub_subset_conjectured_bound(d: int, m: int, r: int) -> float:
    return 1 + (m - 1) * r / d


def certified_schmidt_number(value: float, bound: Callable[[int], float], r_max: int, eps: float = CERTIFY_EPS) -> int:
    """``1 + max{r : value > bound(r) + eps}``, searching ``r < r_max``."""
    certified = 1
    for r in range(1, r_max):
        if value > bound(r) + eps:
            certified = r + 1
    return certified


@dataclass(frozen=True)
class CriterionResult:
    """Value of one criterion and the Schmidt number it certifies."""

    name: str
    value: float
    certified_r: int
    bounds: dict[int, float] = field(default_factory=dict)
    families: tuple[str, ...] = ()


def _result(name, value, bound, r_max, eps, families=()) -> CriterionResult:
    bounds = {r: bound(r) for r in range(1, r_max + 1)}
    return CriterionResult(name, float(value), certified_schmidt_number(value, bound, r_max, eps), bounds, families)


# ---------------------------------------------------------------------------
# Criteria


def _default_sic(d: int) -> MeasurementFamily:
    try:
        return build_sic(d)
    except FamilyError:
        raise CriterionError(f"no SIC available in dimension {d} (catalog: {catalog_dimensions()})") from None


def _default_mubs(d: int) -> MeasurementFamily:
    try:
        return build_mubs(d)
    except FamilyError as exc:
        raise CriterionError(str(exc)) from None


def sic_criterion(state: BipartiteState, fam_a=None, fam_b=None, eps: float = CERTIFY_EPS) -> CriterionResult:
    """``K ||P||_tr`` against ``1 + r``."""
    fam_a = fam_a or _default_sic(state.dA)
    fam_b = fam_b or _default_sic(state.dB)
    if fam_a.kind is not Kind.SIC or fam_b.kind is not Kind.SIC:
        raise CriterionError("SIC criterion needs SIC families on both sides")
    K = sic_constant(state.dA, state.dB)
    value = K * correlation_matrix(state, fam_a, fam_b).trace_norm()
    return _result("sic", value, lambda r: 1 + r, min(state.dA, state.dB), eps, (fam_a.name, fam_b.name))


def mub_criterion(state: BipartiteState, fam_a=None, fam_b=None, eps: float = CERTIFY_EPS) -> CriterionResult:
    """``||Q||_tr`` against ``1 + r`` for complete MUB sets."""
    fam_a = fam_a or _default_mubs(state.dA)
    fam_b = fam_b or _default_mubs(state.dB)
    if fam_a.kind is not Kind.MUB_COMPLETE or fam_b.kind is not Kind.MUB_COMPLETE:
        raise CriterionError("MUB criterion needs complete MUB sets on both sides")
    value = correlation_matrix(state, fam_a, fam_b).trace_norm()
    return _result("mub", value, lambda r: 1 + r, min(state.dA, state.dB), eps, (fam_a.name, fam_b.name))


def ccnr_norm(state: BipartiteState) -> float:
    return trace_norm(realign(state.rho, state.dA, state.dB))


def ccnr_criterion(state: BipartiteState, eps: float = CERTIFY_EPS) -> CriterionResult:
    """``||C||_tr`` (realignment) against ``r``."""
    return _result("ccnr", ccnr_norm(state), lambda r: r, min(state.dA, state.dB), eps)


def _require_square(state: BipartiteState) -> int:
    if state.dA != state.dB:
        raise CriterionError(f"fidelity needs equal local dimensions, got {state.dA} and {state.dB}")
    return state.dA


def fidelity_phi_plus(state: BipartiteState, U=None) -> float:
    """``<phi+| (1 (x) U^dagger) rho (1 (x) U) |phi+>``."""
    d = _require_square(state)
    psi = phi_plus(d)
    if U is not None:
        psi = np.kron(np.eye(d), np.asarray(U)) @ psi
    return float(np.vdot(psi, state.rho @ psi).real)


def fidelity_ascent(state: BipartiteState, U0, iters: int = 200, tol: float = 1e-13) -> tuple[float, np.ndarray, list[float]]:
    """Polar-decomposition ascent on ``U -> fidelity_phi_plus(state, U)``.

    The objective is a convex quadratic form in ``U``, so replacing ``U`` by
    the unitary maximising its linearisation never decreases it.  Returns the
    final value, the final unitary and the value history.
    """
    d = _require_square(state)
    U = np.asarray(U0, dtype=complex)
    # (1 (x) U)|phi+> has amplitude U[j, i] / sqrt(d) at |i, j>
    value = fidelity_phi_plus(state, U)
    history = [value]
    for _ in range(iters):
        psi = U.T.reshape(-1) / np.sqrt(d)
        W = (state.rho @ psi).reshape(d, d)
        U = polar_unitary(W.T)
        new = fidelity_phi_plus(state, U)
        history.append(new)
        if new - value < tol:
            value = max(value, new)
            break
        value = new
    return max(history), U, history


def fidelity_max_entangled(state: BipartiteState, restarts: int = 5, iters: int = 200, seed=0) -> float:
    """Lower bound on ``max_U fidelity_phi_plus(state, U)``.

    The first start is ``U = 1``; the remaining ``restarts - 1`` are Haar
    random.  Being a heuristic, the result can only under-estimate the
    fidelity, which keeps the fidelity criterion sound.
    """
    d = _require_square(state)
    rng = np.random.default_rng(seed)
    starts = [np.eye(d, dtype=complex)] + [random_unitary(d, rng) for _ in range(max(restarts, 1) - 1)]
    return max(fidelity_ascent(state, U0, iters)[0] for U0 in starts)


def fidelity_criterion(state: BipartiteState, restarts: int = 5, iters: int = 200, seed=0,
                       eps: float = CERTIFY_EPS) -> CriterionResult:
    d = _require_square(state)
    F = fidelity_max_entangled(state, restarts, iters, seed)
    return _result("fidelity", F, lambda r: r / d, d, eps)


# ---------------------------------------------------------------------------
# Index of coincidence


def index_of_coincidence(fam: MeasurementFamily, sigma) -> float:
    """``sum_i |tr(E_i sigma)|^2`` for any square operator ``sigma``."""
    sigma = np.asarray(sigma)
    if sigma.shape != (fam.dim, fam.dim):
        raise DimensionError(f"operator of shape {sigma.shape} does not match family dimension {fam.dim}")
    p = np.einsum("iab,ba->i", fam.effects, sigma)
    return float(np.sum(np.abs(p) ** 2))


def coincidence_bound(fam: MeasurementFamily, sigma) -> float:
    """Closed-form value (SIC) or upper bound (MUB, EAM) for the index of coincidence.

    SIC: ``(|tr s|^2 + tr(s^dagger s)) / (d(d+1))`` with equality.
    Complete MUBs: ``tr(s^dagger s) + |tr s|^2``.
    EAM: ``((n-d)|tr s|^2 + d(d-1) tr(s^dagger s)) / (n(n-1))``.
    """
    sigma = np.asarray(sigma)
    d, n = fam.dim, fam.n
    t2 = abs(np.trace(sigma)) ** 2
    hs = float(np.vdot(sigma, sigma).real)
    if fam.kind is Kind.SIC:
        return (t2 + hs) / (d * (d + 1))
    if fam.kind is Kind.MUB_COMPLETE:
        return hs + t2
    if fam.kind is Kind.EAM:
        return ((n - d) * t2 + d * (d - 1) * hs) / (n * (n - 1))
    raise CriterionError(f"no coincidence bound for {fam.kind.value}")


# ---------------------------------------------------------------------------
# Criteria with fewer measurements


@dataclass(frozen=True)
class BoundCheck:
    """Value of an incomplete-measurement norm against proven and conjectured bounds."""

    name: str
    value: float
    r: int
    proven_bound: float
    conjectured_bound: float | None
    experimental: bool = False

    @property
    def exceeds_proven(self) -> bool:
        return self.value > self.proven_bound + CERTIFY_EPS

    @property
    def exceeds_conjectured(self) -> bool:
        return self.conjectured_bound is not None and self.value > self.conjectured_bound + CERTIFY_EPS


def _asymmetric_bound(diag_a, diag_b, off_a, off_b, r):
    # ||P|| <= sqrt(cA cB) sum lambda^2 + sqrt(oA oB) sum_{s != t} lambda_s lambda_t
    diag, off = math.sqrt(diag_a * diag_b), math.sqrt(off_a * off_b)
    return diag - off + off * r


def eam_bounds(dA: int, nA: int, dB: int, nB: int, r: int) -> tuple[float, float | None]:
    """Proven and conjectured bounds on ``||P_n||_tr``; conjectured is ``None`` if asymmetric."""
    if (dA, nA) == (dB, nB):
        return eam_proven_bound(dA, nA, r), eam_conjectured_bound(dA, nA, r)
    diag = [(n - d + d * (d - 1)) / (n * (n - 1)) for d, n in ((dA, nA), (dB, nB))]
    off = [d * (d - 1) / (n * (n - 1)) for d, n in ((dA, nA), (dB, nB))]
    return _asymmetric_bound(*diag, *off, r), None


def mub_subset_bounds(dA: int, mA: int, dB: int, mB: int, r: int) -> tuple[float, float | None]:
    """Proven and conjectured bounds on ``||Q_m||_tr``; conjectured is ``None`` if asymmetric."""
    if (dA, mA) == (dB, mB):
        return mub_subset_proven_bound(dA, mA, r), mub_subset_conjectured_bound(dA, mA, r)
    return _asymmetric_bound(1 + (mA - 1) / dA, 1 + (mB - 1) / dB, 1.0, 1.0, r), None


def eam_criterion(state: BipartiteState, fam_a: MeasurementFamily, fam_b: MeasurementFamily, r: int) -> BoundCheck:
    """``||P_n||_tr`` for two EAMs (a SIC counts as the ``n = d^2`` EAM)."""
    fam_a, fam_b = as_eam(fam_a), as_eam(fam_b)
    value = correlation_matrix(state, fam_a, fam_b).trace_norm()
    proven, conj = eam_bounds(fam_a.dim, fam_a.n, fam_b.dim, fam_b.n, r)
    return BoundCheck("eam", value, r, proven, conj, experimental=conj is None)


def mub_subset_criterion(state: BipartiteState, fam_a: MeasurementFamily, fam_b: MeasurementFamily, r: int) -> BoundCheck:
    """``||Q_m||_tr`` for ``m`` mutually unbiased bases on each side."""
    kinds = (Kind.MUB_COMPLETE, Kind.MUB_SUBSET)
    if fam_a.kind not in kinds or fam_b.kind not in kinds:
        raise CriterionError("MUB subset criterion needs MUB families")
    value = correlation_matrix(state, fam_a, fam_b).trace_norm()
    proven, conj = mub_subset_bounds(fam_a.dim, fam_a.num_bases, fam_b.dim, fam_b.num_bases, r)
    return BoundCheck("mubsubset", value, r, proven, conj, experimental=conj is None)


def _certify_bound_checks(check: Callable[[int], BoundCheck], r_max: int, eps: float) -> CriterionResult:
    first = check(1)
    value = first.value
    bounds = {r: check(r).proven_bound for r in range(1, r_max + 1)}
    return CriterionResult(first.name, value, certified_schmidt_number(value, bounds.__getitem__, r_max, eps), bounds)


# ---------------------------------------------------------------------------
# Consolidated report


@dataclass
class WitnessReport:
    dA: int
    dB: int
    results: dict[str, CriterionResult]
    missing: dict[str, str]
    tolerance: float

    @property
    def certified_schmidt_number(self) -> int:
        return max([1] + [res.certified_r for res in self.results.values()])

    def to_text(self) -> str:
        """Flat ``key=value`` lines with stable key names."""
        lines = [f"dims={self.dA},{self.dB}", f"tolerance={self.tolerance:.12g}"]
        for name in ("fidelity", "ccnr", "sic", "mub", "eam", "mubsubset"):
            if name in self.results:
                res = self.results[name]
                lines.append(f"{name}.value={res.value:.12g}")
                for r, b in res.bounds.items():
                    lines.append(f"{name}.limit.{r}={b:.12g}")
                lines.append(f"{name}.bound.r={res.certified_r}")
            elif name in self.missing:
                lines.append(f"{name}.missing={self.missing[name]}")
        lines.append(f"certified_r={self.certified_schmidt_number}")
        return "\n".join(lines) + "\n"


def witness_report(state: BipartiteState, *, eps: float = CERTIFY_EPS, fidelity_restarts: int = 5, seed=0,
                   eam_families: tuple[MeasurementFamily, MeasurementFamily] | None = None,
                   subset_families: tuple[MeasurementFamily, MeasurementFamily] | None = None,
                   criteria: tuple[str, ...] = ("fidelity", "ccnr", "sic", "mub", "eam", "mubsubset")) -> WitnessReport:
    """Run every requested criterion whose measurements exist for the state's dimensions."""
    results: dict[str, CriterionResult] = {}
    missing: dict[str, str] = {}
    r_max = min(state.dA, state.dB)
    runners: dict[str, Callable[[], CriterionResult]] = {
        "fidelity": lambda: fidelity_criterion(state, fidelity_restarts, seed=seed, eps=eps),
        "ccnr": lambda: ccnr_criterion(state, eps),
        "sic": lambda: sic_criterion(state, eps=eps),
        "mub": lambda: mub_criterion(state, eps=eps),
    }
    if eam_families is not None:
        runners["eam"] = lambda: _certify_bound_checks(
            lambda r: eam_criterion(state, *eam_families, r), r_max, eps)
    else:
        missing["eam"] = "no EAM families supplied"
    if subset_families is not None:
        runners["mubsubset"] = lambda: _certify_bound_checks(
            lambda r: mub_subset_criterion(state, *subset_families, r), r_max, eps)
    else:
        missing["mubsubset"] = "no MUB subset families supplied"
    for name in criteria:
        if name not in runners:
            continue
        try:
            results[name] = runners[name]()
        except (CriterionError, FamilyError, DimensionError) as exc:
            missing[name] = str(exc).replace("\n", " ")
    return WitnessReport(state.dA, state.dB, results, {k: v for k, v in missing.items() if k in criteria}, eps)
