"""Numerical searches: noise-threshold bisection, seesaw maximisation of
correlation trace norms over bounded-Schmidt-rank states, the local-operation
counterexample to monotonicity and the conjecture sweep.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import criteria as cr
from .bridge import check_equivalence
from .measurements import FamilyError, Kind, MeasurementFamily, build_mubs, build_sic, build_simplex_eam
from .numkit import partial_trace, schmidt_truncate, singular_values
from .states import BipartiteState, phi_plus, random_state

log = logging.getLogger(__name__)

CRITERIA = ("fid", "ccnr", "sic", "mub", "eam", "mubsubset")


class ScanError(ValueError):
    """Bracket does not straddle the bound or the profile is not monotone."""


class TheoremViolation(RuntimeError):
    """A proven bound was exceeded; this indicates a bug, not a discovery."""


# ---------------------------------------------------------------------------
# Threshold bisection


def criterion_margin(state: BipartiteState, criterion: str, r: int,
                     families: tuple[MeasurementFamily, MeasurementFamily] | None = None) -> float:
    """``value - bound(r)`` for ``criterion``; positive means Schmidt number > r."""
    if criterion == "fid":
        return state.dA * cr.fidelity_max_entangled(state) - r
    if criterion == "ccnr":
        return cr.ccnr_norm(state) - r
    if criterion == "sic":
        return cr.sic_criterion(state, *(families or ())).value - (1 + r)
    if criterion == "mub":
        return cr.mub_criterion(state, *(families or ())).value - (1 + r)
    if criterion in ("eam", "mubsubset"):
        if families is None:
            raise ScanError(f"criterion {criterion!r} needs explicit measurement families")
        fn = cr.eam_criterion if criterion == "eam" else cr.mub_subset_criterion
        res = fn(state, *families, r)
        return res.value - res.proven_bound
    raise ScanError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")


@dataclass(frozen=True)
class ScanResult:
    parameter_name: str
    threshold: float
    bracket: tuple[float, float]
    criterion: str
    target_r: int
    evaluations: int


def bisect_threshold(builder: Callable[[float], BipartiteState], criterion: str, target_r: int,
                     bracket: tuple[float, float] = (0.0, 1.0), resolution: float = 1e-4,
                     parameter_name: str = "t",
                     families: tuple[MeasurementFamily, MeasurementFamily] | None = None,
                     eps: float = cr.CERTIFY_EPS) -> ScanResult:
    """Smallest parameter at which ``criterion`` exceeds its Schmidt-number-``target_r`` bound.

    The returned bracket ``(lo, hi)`` has the criterion at ``hi`` above
    ``bound(target_r) + eps`` and at ``lo`` not, with ``hi - lo <= resolution``.
    """
    lo, hi = map(float, bracket)
    evaluations = 0

    def margin(t):
        nonlocal evaluations
        evaluations += 1
        return criterion_margin(builder(t), criterion, target_r, families)

    grid = np.linspace(lo, hi, 8)
    profile = [margin(t) for t in grid]
    if any(b < a - 1e-9 for a, b in zip(profile, profile[1:])):
        raise ScanError(f"{criterion} margin is not monotone on {bracket}: {np.round(profile, 6).tolist()}")
    if profile[0] > eps or profile[-1] <= eps:
        raise ScanError(
            f"bracket {bracket} does not straddle the r={target_r} bound "
            f"(margins {profile[0]:.6g} at lo, {profile[-1]:.6g} at hi)"
        )
    # tighten the bracket with the grid before bisecting
    k = next(i for i, m in enumerate(profile) if m > eps)
    lo, hi = float(grid[k - 1]), float(grid[k])
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if margin(mid) > eps:
            hi = mid
        else:
            lo = mid
    return ScanResult(parameter_name, (lo + hi) / 2, (lo, hi), criterion, target_r, evaluations)


# ---------------------------------------------------------------------------
# Seesaw


def norm_bounds(fam_a: MeasurementFamily, fam_b: MeasurementFamily, r: int) -> tuple[float, float | None]:
    """Proven and conjectured upper bounds on the raw table trace norm at Schmidt number ``r``."""
    ka, kb = fam_a.kind, fam_b.kind
    if ka is kb is Kind.SIC:
        b = (1 + r) / cr.sic_constant(fam_a.dim, fam_b.dim)
        return b, b
    if ka is kb is Kind.MUB_COMPLETE:
        return 1.0 + r, 1.0 + r
    if ka in (Kind.MUB_COMPLETE, Kind.MUB_SUBSET) and kb in (Kind.MUB_COMPLETE, Kind.MUB_SUBSET):
        return cr.mub_subset_bounds(fam_a.dim, fam_a.num_bases, fam_b.dim, fam_b.num_bases, r)
    if ka is kb is Kind.EAM:
        return cr.eam_bounds(fam_a.dim, fam_a.n, fam_b.dim, fam_b.n, r)
    raise FamilyError(f"no bound for family pair {ka.value} x {kb.value}")


@dataclass(frozen=True, eq=False)
class SeesawResult:
    best_value: float
    state: BipartiteState
    r: int
    proven_bound: float
    conjectured_bound: float | None
    iterations: int
    restarts: int
    history: tuple[float, ...] = field(default=(), repr=False)


def _pure_table(psi, EA, EB, dA, dB):
    P = psi.reshape(dA, dB)
    return np.einsum("ab,iac,jbd,cd->ij", P.conj(), EA, EB, P, optimize=True).real


def _form(W, EA, EB, dA, dB):
    return np.einsum("ij,iac,jbd->abcd", W, EA, EB, optimize=True).reshape(dA * dB, dA * dB)


def _block_step(psi, H, dA, dB, r):
    """Exact maximisation of psi^dagger H psi over one Schmidt factor, then the other."""
    U, s, Vh = np.linalg.svd(psi.reshape(dA, dB), full_matrices=False)
    A, B = U[:, :r] * s[:r], Vh[:r].T
    H4 = H.reshape(dA, dB, dA, dB)
    for _ in range(2):
        # psi = sum_s A[:, s] (x) B[:, s]; quadratic form in A with B fixed
        HA = np.einsum("bs,abcd,dt->asct", B.conj(), H4, B, optimize=True).reshape(dA * r, dA * r)
        A = np.linalg.eigh((HA + HA.conj().T) / 2)[1][:, -1].reshape(dA, r)
        HB = np.einsum("as,abcd,ct->bsdt", A.conj(), H4, A, optimize=True).reshape(dB * r, dB * r)
        B = np.linalg.eigh((HB + HB.conj().T) / 2)[1][:, -1].reshape(dB, r)
    out = (A @ B.T).reshape(-1)
    return out / np.linalg.norm(out)


def _seesaw_run(psi, EA, EB, dA, dB, r, iters, inner=10, tol=1e-10, patience=5):
    def lin(p, H):
        return float(np.vdot(p, H @ p).real)

    value = float(np.sum(singular_values(_pure_table(psi, EA, EB, dA, dB))))
    history = [value]
    quiet = 0
    for _ in range(iters):
        T = _pure_table(psi, EA, EB, dA, dB)
        U, _, Vh = np.linalg.svd(T, full_matrices=False)
        H = _form(U @ Vh, EA, EB, dA, dB)
        H = (H + H.conj().T) / 2
        shift = max(0.0, -np.linalg.eigvalsh(H)[0])
        base = lin(psi, H)
        cand = psi
        for _ in range(inner):
            cand = schmidt_truncate(H @ cand + shift * cand, dA, dB, r)
        alpha = 1.0
        while lin(cand, H) < base - 1e-14 and alpha > 2.0**-20:
            alpha /= 2
            mixed = (1 - alpha) * psi + alpha * cand
            cand = schmidt_truncate(mixed / np.linalg.norm(mixed), dA, dB, r)
        if lin(cand, H) < base - 1e-14:
            cand = _block_step(psi, H, dA, dB, r)
        if lin(cand, H) >= base - 1e-14:
            psi = cand
        new = float(np.sum(singular_values(_pure_table(psi, EA, EB, dA, dB))))
        history.append(new)
        quiet = quiet + 1 if abs(new - value) < tol else 0
        value = max(value, new)
        if quiet >= patience:
            break
    return value, psi, history


def seesaw_max_norm(dA: int, dB: int, r: int, fam_a: MeasurementFamily, fam_b: MeasurementFamily,
                    restarts: int = 20, iters: int = 500, seed: int = 0, cell: int = 0) -> SeesawResult:
    """Heuristic maximum of the correlation-table trace norm over Schmidt rank <= ``r``.

    Pure states suffice by convexity.  Each outer step fixes the trace-norm
    dual ``U V^dagger`` of the current table and increases the induced
    Hermitian form by shifted power iteration with Schmidt truncation;
    a step is only taken if the form does not decrease (damping by halving,
    falling back to exact block maximisation over one Schmidt factor).
    Restart ``k`` draws from the stream ``SeedSequence([seed, cell, k])``.
    """
    if not 1 <= r <= min(dA, dB):
        raise ValueError(f"r={r} outside [1, {min(dA, dB)}]")
    if (fam_a.dim, fam_b.dim) != (dA, dB):
        raise FamilyError("family dimensions do not match (dA, dB)")
    EA, EB = fam_a.effects, fam_b.effects
    best = (-np.inf, None, [])
    for k in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, cell, k]))
        A = rng.normal(size=(dA, r)) + 1j * rng.normal(size=(dA, r))
        B = rng.normal(size=(dB, r)) + 1j * rng.normal(size=(dB, r))
        psi = (A @ B.T).reshape(-1)
        value, psi, history = _seesaw_run(psi / np.linalg.norm(psi), EA, EB, dA, dB, r, iters)
        if value > best[0]:
            best = (value, psi, history)
    proven, conj = norm_bounds(fam_a, fam_b, r)
    value, psi, history = best
    if value > proven + 1e-9:
        raise TheoremViolation(f"seesaw value {value!r} exceeds proven bound {proven!r} at r={r}")
    return SeesawResult(value, BipartiteState.from_vector(psi, dA, dB), r, proven, conj,
                        len(history) - 1, restarts, tuple(history))


# ---------------------------------------------------------------------------
# Local operations can increase the norms


@dataclass(frozen=True)
class MonotoneReport:
    ccnr_before: float
    sic_before: float
    branches: dict[tuple[int, int], tuple[float, float]]
    reduced_state_unchanged: bool

    def lines(self) -> list[str]:
        out = [f"before.ccnr={self.ccnr_before:.12g}", f"before.sic={self.sic_before:.12g}"]
        for (i, j), (c, s) in sorted(self.branches.items()):
            out.append(f"after.{i}{j}.ccnr={c:.12g}")
            out.append(f"after.{i}{j}.sic={s:.12g}")
        out.append(f"reduced_state_unchanged={str(self.reduced_state_unchanged).lower()}")
        return out


def _group_aa_bb(rho_abab: np.ndarray) -> np.ndarray:
    """Reorder a four-qubit operator from A B A' B' to (A A')(B B')."""
    return rho_abab.reshape((2,) * 8).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)


def monotone_counterexample() -> MonotoneReport:
    """``|phi+><phi+| (x) 1/2 (x) 1/2`` across AA'|BB', before and after Z measurements on A', B'."""
    phi = phi_plus(2)
    bell = np.outer(phi, phi.conj())
    before = BipartiteState(_group_aa_bb(np.kron(bell, np.eye(4) / 4)), 4, 4)
    K = cr.sic_constant(4, 4)
    sic4 = build_sic(4)

    def norms(state):
        return cr.ccnr_norm(state), K * cr.correlation_matrix(state, sic4, sic4).trace_norm()

    c0, s0 = norms(before)
    branches = {}
    averaged = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            ket = np.zeros(4)
            ket[2 * i + j] = 1
            post = np.kron(bell, np.outer(ket, ket))
            branches[(i, j)] = norms(BipartiteState(_group_aa_bb(post), 4, 4))
            averaged += partial_trace(post, 4, 4, keep="A") / 4
    unchanged = bool(np.allclose(averaged, partial_trace(np.kron(bell, np.eye(4) / 4), 4, 4, keep="A"), atol=1e-12))
    return MonotoneReport(c0, s0, branches, unchanged)


# ---------------------------------------------------------------------------
# Conjecture sweep


def equivalence_probe(d: int, samples: int = 100, seed: int = 0) -> float:
    """Largest ``| ||Q||_tr - K ||P||_tr |`` over seeded random states with catalog SICs."""
    sic, mubs = build_sic(d), build_mubs(d)
    gaps = [check_equivalence(random_state(d, d, seed=[seed, d, k]), mubs, mubs, sic, sic).gap
            for k in range(samples)]
    return max(gaps)


@dataclass(frozen=True)
class SweepRow:
    d: int
    label: str
    r: int
    best_value: float
    proven_bound: float
    conjectured_bound: float
    flag: str

    def tsv(self) -> str:
        return "\t".join([str(self.d), self.label, str(self.r), f"{self.best_value:.12g}",
                          f"{self.proven_bound:.12g}", f"{self.conjectured_bound:.12g}", self.flag])


SWEEP_HEADER = "d\tn_or_m\tr\tbest_value\tproven_bound\tconjectured_bound\tflag"


def _eam_for(d: int, n: int) -> MeasurementFamily:
    if n == d + 1:
        return build_simplex_eam(d)
    if n == d * d:
        return cr.as_eam(build_sic(d))
    raise FamilyError(f"no built-in EAM with d={d}, n={n} (built in: n=d+1 simplex, n=d^2 SIC)")


def conjecture_sweep(dims: Sequence[int], ns: Sequence[int] | None = None, ms: Sequence[int] | None = None,
                     rs: Sequence[int] | None = None, restarts: int = 20, iters: int = 500,
                     seed: int = 0) -> tuple[list[SweepRow], list[str]]:
    """Seesaw maxima of ``||P_n||_tr`` and ``||Q_m||_tr`` per (d, n or m, r) cell.

    ``ns``/``ms`` default to every built-in size (``n`` in {d+1, d^2},
    ``m`` in 2..d+1).  Returns the rows and the reasons for skipped cells.
    Raises :class:`TheoremViolation` if any cell exceeds a proven bound.
    """
    rows, skipped = [], []
    cell = 0
    for d in dims:
        cells = []
        for n in (ns if ns is not None else sorted({d + 1, d * d})):
            try:
                fam = _eam_for(d, n)
                cells.append((f"n={n}", fam))
            except FamilyError as exc:
                skipped.append(f"d={d} n={n}: {exc}")
        for m in (ms if ms is not None else range(2, d + 2)):
            try:
                cells.append((f"m={m}", build_mubs(d, m)))
            except FamilyError as exc:
                skipped.append(f"d={d} m={m}: {exc}")
        for label, fam in cells:
            for r in (rs if rs is not None else range(1, d + 1)):
                if not 1 <= r <= d:
                    skipped.append(f"d={d} {label} r={r}: r outside [1, d]")
                    continue
                res = seesaw_max_norm(d, d, r, fam, fam, restarts, iters, seed, cell)
                cell += 1
                flag = "EXCEEDS_CONJECTURE" if res.best_value > res.conjectured_bound + 1e-6 else "ok"
                if flag != "ok":
                    log.warning("d=%d %s r=%d: %.12g exceeds conjectured %.12g", d, label, r,
                                res.best_value, res.conjectured_bound)
                rows.append(SweepRow(d, label, r, res.best_value, res.proven_bound, res.conjectured_bound, flag))
    return rows, skipped
