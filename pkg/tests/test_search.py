import numpy as np
import pytest
from scipy.optimize import minimize

from schmidtnum.measurements import build_mubs, build_sic, build_simplex_eam
from schmidtnum.numkit import schmidt_decompose, trace_norm
from schmidtnum.search import (
    SWEEP_HEADER,
    ScanError,
    TheoremViolation,
    bisect_threshold,
    conjecture_sweep,
    criterion_margin,
    equivalence_probe,
    monotone_counterexample,
    norm_bounds,
    seesaw_max_norm,
)
from schmidtnum.states import dephased, isotropic, rho_q


class TestBisection:
    def test_isotropic_sic(self):
        res = bisect_threshold(lambda v: isotropic(3, v), "sic", 2, resolution=1e-4, parameter_name="v")
        assert res.threshold == pytest.approx(5 / 8, abs=1e-4)
        lo, hi = res.bracket
        assert hi - lo <= 1e-4 and lo <= 5 / 8 <= hi
        assert isinstance(res.threshold, float) and isinstance(lo, float)

    def test_dephased_mub(self):
        res = bisect_threshold(lambda u: dephased(3, u), "mub", 2)
        assert res.threshold == pytest.approx(0.5, abs=1e-4)

    def test_rho_q_ccnr(self):
        res = bisect_threshold(rho_q, "ccnr", 2)
        assert res.threshold == pytest.approx(0.6162, abs=5e-4)

    def test_bracket_property(self):
        res = bisect_threshold(lambda v: isotropic(4, v), "mub", 1, resolution=1e-3)
        lo, hi = res.bracket
        assert criterion_margin(isotropic(4, hi), "mub", 1) > 1e-9
        assert criterion_margin(isotropic(4, lo), "mub", 1) <= 1e-9

    def test_deterministic(self):
        a = bisect_threshold(lambda v: isotropic(2, v), "fid", 1)
        b = bisect_threshold(lambda v: isotropic(2, v), "fid", 1)
        assert a == b
        assert a.threshold == pytest.approx(1 / 3, abs=1e-4)

    def test_not_straddling(self):
        with pytest.raises(ScanError, match="straddle"):
            bisect_threshold(lambda v: isotropic(3, v), "sic", 2, bracket=(0.7, 1.0))

    def test_not_monotone(self):
        with pytest.raises(ScanError, match="monotone"):
            bisect_threshold(lambda t: isotropic(3, 1 - abs(2 * t - 1)), "sic", 1)

    def test_unknown_criterion(self):
        with pytest.raises(ScanError):
            criterion_margin(isotropic(2, 0), "foo", 1)

    def test_eam_needs_families(self):
        with pytest.raises(ScanError):
            criterion_margin(isotropic(2, 0), "eam", 1)


def _trine_table_norm(psi, E):
    T = np.array([[np.vdot(psi, np.kron(a, b) @ psi).real for b in E] for a in E])
    return trace_norm(T)


def _bloch(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def trine_oracle(r, starts=30, seed=7):
    """Independent brute-force maximum of ||P_3||_tr over two-qubit states of Schmidt rank <= r."""
    E = build_simplex_eam(2).effects
    rng = np.random.default_rng(seed)
    if r == 1:
        def f(x):
            return -_trine_table_norm(np.kron(_bloch(x[0], x[1]), _bloch(x[2], x[3])), E)
        dim = 4
    else:
        def f(x):
            psi = x[:4] + 1j * x[4:]
            return -_trine_table_norm(psi / np.linalg.norm(psi), E)
        dim = 8
    best = 0.0
    for _ in range(starts):
        out = minimize(f, rng.normal(size=dim) * 2, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000})
        best = max(best, -out.fun)
    return best


class TestSeesaw:
    def test_sic_saturation(self):
        sic = build_sic(3)
        res = seesaw_max_norm(3, 3, 3, sic, sic, restarts=3, iters=200)
        assert res.best_value == pytest.approx(4 / 12, abs=1e-6)

    def test_mub_product(self):
        mubs = build_mubs(3)
        res = seesaw_max_norm(3, 3, 1, mubs, mubs, restarts=4, iters=300)
        assert res.best_value == pytest.approx(2, abs=1e-6)
        assert schmidt_decompose(np.linalg.eigh(res.state.rho)[1][:, -1], 3, 3).rank == 1

    @pytest.mark.parametrize("r", [1, 2])
    def test_trine_against_oracle(self, r):
        fam = build_simplex_eam(2)
        res = seesaw_max_norm(2, 2, r, fam, fam, restarts=10, iters=500)
        oracle = trine_oracle(r)
        assert res.best_value == pytest.approx(oracle, abs=1e-6)
        assert res.proven_bound == pytest.approx((3 - 2 + 2 * r) / 6)
        assert res.conjectured_bound == pytest.approx((2 + r) / 6)
        assert res.best_value <= res.proven_bound + 1e-9

    def test_history_monotone_and_rank(self):
        fam = build_mubs(3, 2)
        res = seesaw_max_norm(3, 3, 2, fam, fam, restarts=3, iters=200, seed=5)
        assert all(b >= a - 1e-12 for a, b in zip(res.history, res.history[1:]))
        psi = np.linalg.eigh(res.state.rho)[1][:, -1]
        assert schmidt_decompose(psi, 3, 3).rank <= 2
        assert res.best_value == pytest.approx(5 / 3, abs=1e-6)

    def test_deterministic(self):
        fam = build_simplex_eam(3)
        a = seesaw_max_norm(3, 3, 2, fam, fam, restarts=2, iters=100, seed=11)
        b = seesaw_max_norm(3, 3, 2, fam, fam, restarts=2, iters=100, seed=11)
        assert a.best_value == b.best_value and a.history == b.history

    def test_rank_out_of_range(self):
        fam = build_sic(2)
        with pytest.raises(ValueError):
            seesaw_max_norm(2, 2, 3, fam, fam)

    def test_norm_bounds(self):
        assert norm_bounds(build_sic(3), build_sic(3), 2) == pytest.approx((0.25, 0.25))
        assert norm_bounds(build_mubs(3), build_mubs(3), 2) == (3.0, 3.0)


class TestMonotone:
    def test_values(self):
        rep = monotone_counterexample()
        assert rep.ccnr_before == pytest.approx(1, abs=1e-9)
        assert rep.sic_before == pytest.approx(2, abs=1e-9)
        assert len(rep.branches) == 4
        for c, s in rep.branches.values():
            assert c == pytest.approx(2, abs=1e-9)
            assert s == pytest.approx(3, abs=1e-9)
        assert rep.reduced_state_unchanged

    def test_lines(self):
        lines = monotone_counterexample().lines()
        assert lines[0] == "before.ccnr=1"
        assert lines[-1] == "reduced_state_unchanged=true"


class TestSweep:
    def test_equivalence_probe(self):
        assert equivalence_probe(5, samples=100) < 1e-8

    def test_rows_and_flags(self):
        rows, skipped = conjecture_sweep([2], ns=[3, 4, 7], ms=[2, 3], restarts=3, iters=200)
        assert any("n=7" in s for s in skipped)
        labels = {(r.label, r.r) for r in rows}
        assert labels == {(l, r) for l in ("n=3", "n=4", "m=2", "m=3") for r in (1, 2)}
        for row in rows:
            assert row.best_value <= row.proven_bound + 1e-9
            assert row.flag == "ok"
            assert len(row.tsv().split("\t")) == len(SWEEP_HEADER.split("\t"))
        full = [r for r in rows if r.label in ("n=4", "m=3")]
        for row in full:
            assert row.conjectured_bound == pytest.approx(row.proven_bound)

    def test_conjectured_bounds_in_rows(self):
        rows, _ = conjecture_sweep([3], ns=[], ms=[2], rs=[2], restarts=3, iters=200)
        (row,) = rows
        assert row.conjectured_bound == pytest.approx(1 + 2 / 3)
        assert row.best_value <= row.conjectured_bound + 1e-6


def test_theorem_violation_is_runtime_error():
    assert issubclass(TheoremViolation, RuntimeError)
