"""Command-line front end.

Exit status: 0 on success, 1 on input errors, 2 if a proven bound is found
violated (which signals an internal error).

State specifications::

    iso:d=3,v=0.7      deph:d=4,u=0.5      maxent:d=3
    rhoq:q=0.62[,reading=PRODUCT_01]       file:<QST-1 path>

For ``scan`` the scanned parameter is left out, e.g. ``--family deph:d=4``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from . import criteria as cr
from .bridge import build_theta, check_equivalence, theta_to_candidate_sic
from .measurements import (
    FamilyError,
    Kind,
    build_mubs,
    build_sic,
    build_simplex_eam,
    read_meas,
    verify,
    write_meas,
)
from .numkit import DimensionError
from .search import (
    SWEEP_HEADER,
    ScanError,
    TheoremViolation,
    bisect_threshold,
    conjecture_sweep,
    equivalence_probe,
    monotone_counterexample,
)
from .states import BipartiteState, StateError, dephased, isotropic, max_entangled, random_state, read_qst, rho_q

COMMANDS = ("witness", "scan", "verify", "conjecture", "bridge", "monotone")
INPUT_ERRORS = (StateError, FamilyError, DimensionError, ScanError, cr.CriterionError, OSError, ValueError)


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


@dataclass
class RunConfig:
    command: str
    state: str | None = None
    family: str | None = None
    dims: list[int] = field(default_factory=list)
    criterion: str = "all"
    target_r: int = 1
    resolution: float = 1e-4
    bracket: tuple[float, float] = (0.0, 1.0)
    seed: int = 0
    tol: float = 1e-9
    meas_a: Path | None = None
    meas_b: Path | None = None
    out: Path | None = None
    kind: str | None = None
    m: int | None = None
    ns: list[int] | None = None
    ms: list[int] | None = None
    rs: list[int] | None = None
    restarts: int = 20
    iters: int = 500
    samples: int = 100
    export: Path | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for p in (self.meas_a, self.meas_b):
            if p is not None and not p.is_file():
                raise FileNotFoundError(f"measurement file not found: {p}")
        for spec in (self.state, self.family):
            if spec and spec.startswith("file:") and not Path(spec[5:]).is_file():
                raise FileNotFoundError(f"state file not found: {spec[5:]}")
        if self.out is not None and not self.out.parent.is_dir():
            raise FileNotFoundError(f"output directory does not exist: {self.out.parent}")


# ---------------------------------------------------------------------------
# State mini-language

_PARAM_OF = {"iso": "v", "deph": "u", "rhoq": "q"}


def parse_spec(spec: str) -> tuple[str, dict[str, str]]:
    name, _, rest = spec.partition(":")
    if name == "file":
        return name, {"path": rest}
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {item!r} in {spec!r}")
        params[key.strip()] = val.strip()
    return name, params


def _build(name: str, params: dict[str, str]) -> BipartiteState:
    try:
        if name == "iso":
            return isotropic(int(params["d"]), float(params["v"]))
        if name == "deph":
            return dephased(int(params["d"]), float(params["u"]))
        if name == "maxent":
            return max_entangled(int(params["d"]))
        if name == "rhoq":
            return rho_q(float(params["q"]), params.get("reading", "PRODUCT_01"))
        if name == "file":
            return read_qst(params["path"])
    except KeyError as exc:
        raise ValueError(f"state {name!r} is missing parameter {exc}") from None
    raise ValueError(f"unknown state family {name!r}")


def parse_state(spec: str) -> BipartiteState:
    return _build(*parse_spec(spec))


def parse_family(spec: str) -> tuple[str, Callable[[float], BipartiteState]]:
    name, params = parse_spec(spec)
    if name not in _PARAM_OF:
        raise ValueError(f"{name!r} is not a one-parameter family (use iso, deph or rhoq)")
    key = _PARAM_OF[name]
    if key in params:
        raise ValueError(f"leave the scanned parameter {key!r} out of --family")
    return key, lambda t: _build(name, {**params, key: repr(float(t))})


# ---------------------------------------------------------------------------
# Commands


def _families(cfg: RunConfig):
    if cfg.meas_a is None and cfg.meas_b is None:
        return None
    if cfg.meas_a is None or cfg.meas_b is None:
        raise ValueError("--meas-a and --meas-b must be given together")
    return read_meas(cfg.meas_a, cfg.tol), read_meas(cfg.meas_b, cfg.tol)


def _check_theorems(report: cr.WitnessReport) -> None:
    r_max = min(report.dA, report.dB)
    for name, res in report.results.items():
        if res.value > res.bounds[r_max] + 1e-9:
            raise TheoremViolation(f"{name} value {res.value!r} exceeds its bound at r=min(dA, dB)={r_max}")


def cmd_witness(cfg: RunConfig) -> list[str]:
    if not cfg.state:
        raise ValueError("witness needs --state")
    state = parse_state(cfg.state)
    fams = _families(cfg)
    eam = subset = None
    if fams is not None:
        kinds = {f.kind for f in fams}
        if kinds <= {Kind.EAM, Kind.SIC}:
            eam = fams
        elif kinds <= {Kind.MUB_COMPLETE, Kind.MUB_SUBSET}:
            subset = fams
        else:
            raise FamilyError(f"incompatible --meas-a/--meas-b kinds {sorted(k.value for k in kinds)}")
    names = ("fidelity", "ccnr", "sic", "mub", "eam", "mubsubset")
    if cfg.criterion != "all":
        names = ({"fid": "fidelity"}.get(cfg.criterion, cfg.criterion),)
    report = cr.witness_report(state, eps=cfg.tol, seed=cfg.seed, eam_families=eam, subset_families=subset,
                               criteria=names)
    _check_theorems(report)
    return [f"state={cfg.state}"] + report.to_text().splitlines()


def cmd_scan(cfg: RunConfig) -> list[str]:
    if not cfg.family:
        raise ValueError("scan needs --family")
    if cfg.criterion == "all":
        raise ValueError("scan needs a single --criterion")
    key, builder = parse_family(cfg.family)
    res = bisect_threshold(builder, cfg.criterion, cfg.target_r, cfg.bracket, cfg.resolution,
                           parameter_name=key, families=_families(cfg), eps=cfg.tol)
    return [
        f"family={cfg.family}",
        f"criterion={res.criterion}",
        f"target_r={res.target_r}",
        f"parameter={res.parameter_name}",
        f"threshold={fmt(res.threshold)}",
        f"bracket.lo={fmt(res.bracket[0])}",
        f"bracket.hi={fmt(res.bracket[1])}",
        f"evaluations={res.evaluations}",
    ]


def cmd_verify(cfg: RunConfig) -> tuple[list[str], int]:
    if cfg.meas_a is not None:
        fam = read_meas(cfg.meas_a, cfg.tol, check=False)
    else:
        if not cfg.kind or not cfg.dims:
            raise ValueError("verify needs --meas-a or --kind with --dims")
        d = cfg.dims[0]
        builders = {"sic": lambda: build_sic(d), "mub": lambda: build_mubs(d, cfg.m),
                    "eam": lambda: build_simplex_eam(d)}
        if cfg.kind not in builders:
            raise ValueError(f"unknown --kind {cfg.kind!r}")
        fam = builders[cfg.kind]()
    rep = verify(fam, cfg.tol)
    if cfg.export is not None:
        write_meas(fam, cfg.export)
    lines = [
        f"kind={fam.kind.value}", f"d={fam.dim}", f"n={fam.n}",
        f"completeness_residual={rep.completeness_residual:.3e}",
        f"overlap_deviation={rep.overlap_deviation:.3e}",
        f"min_eigenvalue={rep.min_eigenvalue:.3e}",
        f"rank_one_deviation={rep.rank_one_deviation:.3e}",
    ]
    lines += [f"check.{k}={'pass' if ok else 'fail'}" for k, ok in rep.checks.items()]
    lines.append(f"verified={'yes' if rep.passed else 'no'}")
    return lines, 0 if rep.passed else 1


def cmd_bridge(cfg: RunConfig) -> list[str]:
    dims = cfg.dims or [2, 3, 5, 7]
    lines = []
    for d in dims:
        th = build_theta(d)
        M = th.incidence
        mubs = build_mubs(d)
        cand = theta_to_candidate_sic(mubs, th)
        gram = np.max(np.abs(th.theta @ th.theta.T - np.eye(d * d) / (d * (d + 1))))
        state = random_state(d, d, seed=[cfg.seed, d])
        Q = cr.born_table(state.rho, mubs.effects, mubs.effects, d, d)
        P = cr.born_table(state.rho, cand.effects, cand.effects, d, d)
        transfer = np.max(np.abs(P - th.theta @ Q @ th.theta.T))
        gaps = [check_equivalence(random_state(d, d, seed=[cfg.seed, d, k]), mubs, mubs, cand, cand).gap
                for k in range(cfg.samples)]
        lines += [
            f"d={d}.incidence.row_weights_ok={str(bool(np.all(M.sum(axis=1) == d + 1))).lower()}",
            f"d={d}.incidence.pair_intersections_ok="
            f"{str(bool(np.all((M @ M.T)[~np.eye(d * d, dtype=bool)] == 1))).lower()}",
            f"d={d}.theta_gram_residual={gram:.3e}",
            f"d={d}.transfer_residual={transfer:.3e}",
            f"d={d}.candidate_min_eigenvalue={fmt(cand.min_eigenvalue)}",
            f"d={d}.candidate_is_sic={str(cand.is_sic).lower()}",
            f"d={d}.theta_equivalence_max_gap={max(gaps):.3e}",
        ]
        try:
            lines.append(f"d={d}.catalog_equivalence_max_gap={equivalence_probe(d, cfg.samples, cfg.seed):.3e}")
        except FamilyError as exc:
            lines.append(f"d={d}.catalog_equivalence_missing={exc}")
    return lines


def cmd_conjecture(cfg: RunConfig) -> tuple[list[str], int]:
    dims = cfg.dims or [2, 3]
    rows, skipped = conjecture_sweep(dims, cfg.ns, cfg.ms, cfg.rs, cfg.restarts, cfg.iters, cfg.seed)
    lines = [SWEEP_HEADER] + [row.tsv() for row in rows]
    lines += [f"# skipped {s}" for s in skipped]
    for d in dims:
        try:
            lines.append(f"# equivalence d={d} max_gap={equivalence_probe(d, cfg.samples, cfg.seed):.3e}")
        except FamilyError as exc:
            lines.append(f"# equivalence d={d} skipped: {exc}")
    flagged = [r for r in rows if r.flag != "ok"]
    if flagged:
        lines.append(f"# WARNING {len(flagged)} cell(s) exceed a conjectured bound")
    return lines, 0


def cmd_monotone(cfg: RunConfig) -> list[str]:
    return monotone_counterexample().lines()


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the exit status."""
    try:
        cfg.validate()
        handler = {"witness": cmd_witness, "scan": cmd_scan, "verify": cmd_verify, "bridge": cmd_bridge,
                   "conjecture": cmd_conjecture, "monotone": cmd_monotone}[cfg.command]
        result = handler(cfg)
        lines, status = result if isinstance(result, tuple) else (result, 0)
    except TheoremViolation as exc:
        print(f"error: proven bound violated: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = "\n".join([f"# schmidtnum {__version__} {cfg.command}"] + lines) + "\n"
    if cfg.out is not None:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)
    return status


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _bracket(text: str) -> tuple[float, float]:
    lo, hi = (float(x) for x in text.split(","))
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schmidtnum", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--state", help="state specification (witness)")
    parser.add_argument("--family", help="one-parameter family without its parameter (scan)")
    parser.add_argument("--dims", type=_ints, default=[], help="comma-separated dimensions")
    parser.add_argument("--criterion", default="all", choices=("fid", "ccnr", "sic", "mub", "eam", "mubsubset", "all"))
    parser.add_argument("--target-r", type=int, default=1,
                        help="Schmidt-number bound to beat; exceeding it certifies target_r + 1")
    parser.add_argument("--resolution", type=float, default=1e-4)
    parser.add_argument("--bracket", type=_bracket, default=(0.0, 1.0), help="lo,hi for scan")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--meas-a", type=Path)
    parser.add_argument("--meas-b", type=Path)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--kind", choices=("sic", "mub", "eam"), help="built-in family to verify")
    parser.add_argument("--m", type=int, help="number of MUBs for verify --kind mub")
    parser.add_argument("--ns", type=_ints, help="EAM sizes for conjecture")
    parser.add_argument("--ms", type=_ints, help="MUB counts for conjecture")
    parser.add_argument("--rs", type=_ints, help="Schmidt numbers for conjecture")
    parser.add_argument("--restarts", type=int, default=20)
    parser.add_argument("--iters", type=int, default=500)
    parser.add_argument("--samples", type=int, default=100, help="random states per dimension (bridge, conjecture)")
    parser.add_argument("--export", type=Path, help="write the verified family as MEAS-1 (verify)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
