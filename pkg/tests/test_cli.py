import pytest

from schmidtnum import cli
from schmidtnum.states import isotropic, write_qst


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def values(out):
    return dict(line.rsplit("=", 1) for line in out.splitlines() if "=" in line and not line.startswith("#"))


def test_witness_isotropic(capsys):
    status, out, _ = run(capsys, "witness", "--state", "iso:d=3,v=0.7")
    assert status == 0
    assert out.splitlines()[0] == "# schmidtnum 0.1.0 witness"
    kv = values(out)
    assert kv["certified_r"] == "3"
    # every certification is printed next to its value and limits
    for name in ("fidelity", "ccnr", "sic", "mub"):
        assert f"{name}.value" in kv and f"{name}.limit.2" in kv and f"{name}.bound.r" in kv


def test_witness_values_match_library(capsys):
    from schmidtnum.criteria import mub_criterion, sic_criterion

    _, out, _ = run(capsys, "witness", "--state", "iso:d=3,v=0.7")
    kv = values(out)
    assert float(kv["sic.value"]) == pytest.approx(sic_criterion(isotropic(3, 0.7)).value, rel=1e-11)
    assert float(kv["mub.value"]) == pytest.approx(mub_criterion(isotropic(3, 0.7)).value, rel=1e-11)


def test_witness_single_criterion(capsys):
    status, out, _ = run(capsys, "witness", "--state", "maxent:d=2", "--criterion", "ccnr")
    kv = values(out)
    assert status == 0 and kv["ccnr.value"] == "2" and "sic.value" not in kv


def test_witness_file_state(capsys, tmp_path):
    path = tmp_path / "s.qst"
    write_qst(isotropic(2, 0.5), path)
    status, out, _ = run(capsys, "witness", "--state", f"file:{path}")
    assert status == 0 and values(out)["certified_r"] == "2"


def test_witness_with_meas_files(capsys, tmp_path):
    a = tmp_path / "a.txt"
    assert run(capsys, "verify", "--kind", "eam", "--dims", "3", "--export", str(a))[0] == 0
    status, out, _ = run(capsys, "witness", "--state", "iso:d=3,v=0.9", "--meas-a", str(a), "--meas-b", str(a))
    kv = values(out)
    assert status == 0 and "eam.value" in kv and "eam.limit.1" in kv


def test_scan_dephased(capsys):
    status, out, _ = run(capsys, "scan", "--family", "deph:d=4", "--criterion", "mub", "--target-r", "2",
                         "--resolution", "1e-4")
    kv = values(out)
    assert status == 0
    assert float(kv["threshold"]) == pytest.approx(1 / 3, abs=1e-4)
    assert kv["parameter"] == "u"


def test_monotone(capsys):
    status, out, _ = run(capsys, "monotone")
    kv = values(out)
    assert status == 0
    assert kv["before.ccnr"] == "1" and kv["before.sic"] == "2"
    assert all(kv[f"after.{i}{j}.ccnr"] == "2" and kv[f"after.{i}{j}.sic"] == "3" for i in "01" for j in "01")


def test_verify_round_trip(capsys, tmp_path):
    path = tmp_path / "m.txt"
    status, out, _ = run(capsys, "verify", "--kind", "mub", "--dims", "9", "--export", str(path))
    assert status == 0 and values(out)["verified"] == "yes"
    status, out, _ = run(capsys, "verify", "--meas-a", str(path))
    assert status == 0 and values(out)["n"] == "90"


def test_verify_failure_status(capsys, tmp_path):
    path = tmp_path / "m.txt"
    run(capsys, "verify", "--kind", "sic", "--dims", "2", "--export", str(path))
    text = path.read_text().splitlines()
    text[2] = " ".join(["0.4"] + text[2].split()[1:])
    path.write_text("\n".join(text) + "\n")
    status, out, _ = run(capsys, "verify", "--meas-a", str(path))
    assert status == 1 and values(out)["verified"] == "no"


def test_bridge(capsys):
    status, out, _ = run(capsys, "bridge", "--dims", "2,3", "--samples", "5")
    kv = values(out)
    assert status == 0
    assert kv["d=2.candidate_is_sic"] == "true"
    assert float(kv["d=3.theta_gram_residual"]) < 1e-10
    assert float(kv["d=3.transfer_residual"]) < 1e-10


def test_conjecture(capsys):
    status, out, _ = run(capsys, "conjecture", "--dims", "2", "--ns", "3", "--ms", "2", "--restarts", "2",
                         "--iters", "100", "--samples", "5")
    lines = out.splitlines()
    assert status == 0
    assert lines[1] == "d\tn_or_m\tr\tbest_value\tproven_bound\tconjectured_bound\tflag"
    assert len([ln for ln in lines if ln.startswith("2\t")]) == 4


def test_byte_stable(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.txt"
        assert cli.main(["witness", "--state", "rhoq:q=0.61", "--seed", "3", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv", [
    ["witness", "--state", "bogus:d=3"],
    ["witness", "--state", "iso:d=3,v=1.5"],
    ["witness", "--state", "iso:d=3"],
    ["witness", "--state", "file:/nonexistent.qst"],
    ["witness", "--state", "rhoq:q=0.5,reading=LITERAL"],
    ["scan", "--family", "iso:d=3", "--criterion", "sic", "--target-r", "2", "--bracket", "0.8,1"],
    ["scan", "--family", "iso:d=3,v=0.5", "--criterion", "sic"],
    ["verify", "--meas-a", "/nonexistent"],
    ["verify", "--kind", "mub", "--dims", "6"],
    ["bridge", "--dims", "4"],
    ["witness", "--state", "iso:d=2,v=0.5", "--out", "/nonexistent/dir/out.txt"],
])
def test_input_errors(capsys, argv):
    status, out, err = run(capsys, *argv)
    assert status == 1
    assert err.startswith("error:") and out == ""


def test_theorem_violation_exit_code(capsys, monkeypatch):
    from schmidtnum.search import TheoremViolation

    def boom(cfg):
        raise TheoremViolation("test")

    monkeypatch.setattr(cli, "cmd_monotone", boom)
    status, _, err = run(capsys, "monotone")
    assert status == 2 and "proven bound" in err


def test_default_config():
    cfg = cli.RunConfig("witness")
    assert cfg.seed == 0 and cfg.tol == 1e-9
