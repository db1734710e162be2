import json
import subprocess
import sys

import pytest

from ddesolve.cli import SCHEMA, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand_text(capsys):
    code, out, _ = run(capsys, "expand", "orientations.dde", "-N", "4")
    assert code == 0
    assert "F1(t,1) = 1 + 2*t + 10*t^2 + 66*t^3 + O(t^4)" in out.splitlines()


def test_expand_json_schema(capsys):
    code, out, _ = run(capsys, "expand", "2const.dde", "-N", "5", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == SCHEMA and doc["command"] == "expand"
    assert doc["specializations"]["F1(t,1)"] == ["1", "1", "3", "12", "56"]
    assert len(doc["input_digest"]) == 64


def test_json_is_deterministic(capsys):
    outs = [run(capsys, "solve", "2const.dde", "--format", "json", "-N", "30")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    assert "timings" not in json.loads(outs[0])["result"]


def test_timings_flag(capsys):
    _, out, _ = run(capsys, "solve", "2const.dde", "--format", "json", "-N", "30", "--timings")
    assert "total" in json.loads(out)["result"]["timings"]


def test_solve_text(capsys):
    code, out, _ = run(capsys, "solve", "2const.dde", "-N", "30")
    assert code == 0
    assert "minimal factor" in out
    assert "verified: R(t, F1(t,1)) = O(t^30)" in out


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "orientations.dde", "--format", "json")
    doc = json.loads(out)
    assert (doc["n"], doc["k"], doc["delta"]) == (2, 1, 3)
    assert doc["duplication"] == "46118408"


def test_guess(capsys):
    code, out, _ = run(capsys, "guess", "orientations.dde", "-N", "40")
    assert code == 0
    assert out.startswith("R = 64*t^3*z0^3")


@pytest.mark.parametrize("argv,code", [
    (["guess", "orientations.dde", "--dt", "1", "--dz", "1", "-N", "20"], 4),
    (["guess", "orientations.dde", "-N", "20"], 2),
])
def test_guess_failures(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_diagnose(capsys):
    code, out, _ = run(capsys, "diagnose", "orientations.dde", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["hypotheses"]["h1_root_count"]["state"] == "confirmed"
    assert doc["hypotheses"]["h2_root_count"]["state"] == "refuted"
    assert "E" in doc


def test_deform_flag(capsys):
    code, out, _ = run(capsys, "diagnose", "orientations.dde", "--deform", "--format", "json")
    d = json.loads(out)["deformation"]
    assert d["alpha"] == 72 and d["det_identity_mod_t^(n+1)"] is True


def test_reduce_exit_code(capsys):
    code, out, _ = run(capsys, "solve", "--strategy", "reduce", "orientations.dde")
    assert code == 3
    assert "h2_root_count: refuted" in out


def test_budget_exit_code(capsys):
    code, out, _ = run(capsys, "solve", "--strategy", "dup", "orientations.dde", "--budget-seconds", "0.5", "-N", "30")
    assert code == 4


@pytest.mark.parametrize("argv,message", [
    (["expand", "missing.dde"], "cannot read"),
    (["expand", "orientations.dde", "-N", "2"], "-N must be at least 4"),
    (["solve", "orientations.dde", "--budget-seconds", "0"], "must be positive"),
])
def test_input_errors(capsys, argv, message):
    code, _, err = run(capsys, *argv)
    assert code == 2 and message in err


def test_parse_error_location(capsys, tmp_path):
    bad = tmp_path / "bad.dde"
    bad.write_text("catalytic u at 1\nF1 = 1 + t*D[F1")
    code, _, err = run(capsys, "expand", str(bad))
    assert code == 2
    assert f"{bad}:2:" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ddesolve", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ddesolve ")
