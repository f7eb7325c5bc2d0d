"""End-to-end runs of the command-line front end through main(argv).

Exit codes are part of the contract: 0 success, 1 check failure, 2 usage
error, 3 runtime singularity."""

import json
from fractions import Fraction

import pytest

from laxforge.algebra import CoeffPoly, SpectralPoly
from laxforge.benenti import BenentiSpec, hamiltonians
from laxforge.cli import default_initial, main, parse_numbers, parse_sigma
from laxforge.lax import LaxMatrix, flow_matrix, lax_matrix


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------------- parsing

def test_parse_sigma():
    assert parse_sigma("1:1") == ((1, Fraction(1)),)
    assert parse_sigma("4:-1, -2:1/3") == ((4, Fraction(-1)), (-2, Fraction(1, 3)))
    with pytest.raises(ValueError):
        parse_sigma("nonsense")
    with pytest.raises(ValueError):
        parse_sigma("")


def test_parse_numbers():
    assert parse_numbers("0.7,0") == (0.7, 0.0)
    assert parse_numbers("1/2, -3") == (0.5, -3.0)
    with pytest.raises(ValueError):
        parse_numbers("one,two")


def test_default_initial_keeps_last_position_nonzero():
    spec = BenentiSpec(3, 0, 0, ((1, Fraction(1)),))
    q0, p0 = default_initial(spec)
    assert p0 == (0.0, 0.0, 0.0)
    assert q0[0] == pytest.approx(0.019)
    assert q0[1] == pytest.approx(-0.019 ** 2)
    assert q0[2] == pytest.approx(0.019 ** 3)
    assert all(x != 0 for x in q0)


# --------------------------------------------------------------------- build

def test_build_single_degree_text(capsys):
    code, out, _ = run(capsys, "build", "--n", "1", "--f", "0", "--g", "0",
                       "--sigma", "1:1")
    assert code == 0
    assert "H_1 = 1/2*p1^2 + q1" in out
    assert "(1,1): -p1" in out
    assert "(1,2): l + q1" in out
    assert "(2,1): 2" in out
    assert "(2,2): p1" in out
    assert "U_1:" in out


def test_build_rejects_degenerate_size(capsys):
    code, _, _ = run(capsys, "build", "--n", "0", "--f", "0", "--g", "0",
                     "--sigma", "1:1")
    assert code == 2


def test_build_json_round_trips(capsys):
    code, out, _ = run(capsys, "build", "--n", "2", "--f", "1", "--g", "1",
                       "--sigma", "4:-1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    spec = BenentiSpec.from_json(doc["spec"])
    assert spec == BenentiSpec(2, 1, 1, ((4, Fraction(-1)),))
    table = spec.table
    hams = tuple(CoeffPoly.from_json(table, h) for h in doc["hamiltonians"])
    assert hams == hamiltonians(spec)
    assert LaxMatrix.from_json(table, doc["lax"]) == lax_matrix(spec)
    flows = [LaxMatrix.from_json(table, u) for u in doc["flows"]]
    assert flows == [flow_matrix(spec, 1), flow_matrix(spec, 2)]


def test_build_accepts_negative_sigma_exponent(capsys):
    code, out, _ = run(capsys, "build", "--n", "2", "--f", "-1", "--g", "0",
                       "--sigma", "-2:1")
    assert code == 0
    assert "sigma=1*l^-2" in out


def test_build_from_example(capsys):
    code, out, _ = run(capsys, "build", "--example", "ex1")
    assert code == 0
    assert "n=3" in out and "H_3" in out and "U_3:" in out


def test_build_needs_a_spec(capsys):
    assert run(capsys, "build")[0] == 2
    assert run(capsys, "build", "--n", "2")[0] == 2
    assert run(capsys, "build", "--example", "ex1", "--n", "2",
               "--sigma", "1:1")[0] == 2
    assert run(capsys, "build", "--example", "nope")[0] == 2
    assert run(capsys, "build", "--n", "1", "--sigma", "bogus")[0] == 2


# -------------------------------------------------------------------- verify

def test_verify_example_passes(capsys):
    code, out, _ = run(capsys, "verify", "--example", "ex1")
    assert code == 0
    lines = [l for l in out.splitlines() if l]
    assert all(l.startswith("PASS") for l in lines)
    assert any("check_fixture:ex1" in l for l in lines)


def test_verify_corrupt_controls_fail(capsys):
    code, out, _ = run(capsys, "verify", "--corrupt")
    assert code == 1
    lines = out.splitlines()
    assert len(lines) == 2
    assert all(l.startswith("FAIL negative_control") for l in lines)
    assert all("witness=" in l for l in lines)


def test_verify_smoke_grid(capsys):
    code, out, _ = run(capsys, "verify", "--grid", "smoke", "--format", "json")
    assert code == 0
    docs = [json.loads(l) for l in out.splitlines()]
    assert docs and all(d["status"] == "pass" for d in docs)
    checks = {d["check"] for d in docs}
    assert {"check_spectral_curve", "check_lax_equation:k=1",
            "check_involution"} <= checks


def test_verify_flag_spec(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--f", "1", "--g", "1",
                       "--sigma", "4:-1")
    assert code == 0
    assert "check_n2_closed_form" in out
    assert "check_gauge_invariance" in out
    assert "check_oracle_agreement" in out


def test_verify_json_reports_round_trip(capsys):
    from laxforge.verify import CheckReport
    code, out, _ = run(capsys, "verify", "--example", "ex3_g0",
                       "--format", "json", "--seed", "5")
    assert code == 0
    for line in out.splitlines():
        rep = CheckReport.from_json(json.loads(line))
        assert rep.ok


def test_verify_same_seed_same_bytes(capsys):
    args = ("verify", "--n", "2", "--f", "0", "--g", "0", "--sigma", "3:1",
            "--format", "json", "--seed", "9")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_verify_seed_env_fallback(capsys, monkeypatch):
    argv = ("verify", "--example", "ex2_g0", "--format", "json")
    monkeypatch.setenv("LAXFORGE_SEED", "9")
    _, from_env, _ = run(capsys, *argv)
    monkeypatch.delenv("LAXFORGE_SEED")
    _, explicit, _ = run(capsys, *argv, "--seed", "9")
    assert from_env == explicit
    monkeypatch.setenv("LAXFORGE_SEED", "not-a-number")
    assert run(capsys, *argv)[0] == 2


# ------------------------------------------------------------------ simulate

def test_simulate_quiet_short_run(capsys):
    code, out, _ = run(capsys, "simulate", "--example", "ex2_g1",
                       "--t-end", "1")
    assert code == 0
    assert "status: pass" in out


def test_simulate_default_window_passes(capsys):
    # the full default window: ten time units at the default step
    code, out, _ = run(capsys, "simulate", "--example", "ex2_g1")
    assert code == 0
    assert "status: pass" in out


def test_simulate_zero_horizon(capsys):
    code, out, _ = run(capsys, "simulate", "--example", "ex2_g1",
                       "--t-end", "0")
    assert code == 0
    assert "status: pass" in out
    assert "0.000e+00" in out


def test_simulate_singular_start_exits_three(capsys):
    code, _, err = run(capsys, "simulate", "--example", "ex3_g0",
                       "--q0", "0.7,0", "--p0", "0.3,0.2")
    assert code == 3
    assert "singular" in err


def test_simulate_json_document(capsys):
    code, out, _ = run(capsys, "simulate", "--example", "ex2_g1",
                       "--t-end", "0.5", "--format", "json", "--seed", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass"
    assert doc["seed"] == 2
    assert doc["trajectory"]["dt"] == 1e-3
    assert len(doc["trajectory"]["energy_drift"]) == 2
    assert BenentiSpec.from_json(doc["spec"]).n == 2


def test_simulate_argument_errors(capsys):
    base = ("simulate", "--example", "ex2_g1", "--t-end", "1")
    assert run(capsys, *base, "--q0", "0.1,0.2")[0] == 2
    assert run(capsys, *base, "--q0", "0.1,0.2", "--p0", "0,0",
               "--probes", "0,1")[0] == 2
    assert run(capsys, *base, "--flow", "5")[0] == 2
    assert run(capsys, *base, "--q0", "0.1", "--p0", "0")[0] == 2


def test_simulate_custom_initial_data(capsys):
    code, out, _ = run(capsys, "simulate", "--example", "ex2_g1",
                       "--t-end", "1", "--q0", "0.019,-0.000361",
                       "--p0", "0,0", "--probes", "2.5,-5.0")
    assert code == 0
    assert "probes: [2.5, -5.0]" in out


# ------------------------------------------------------------------ examples

def test_examples_listing(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 7
    assert lines[0].startswith("ex1")
    assert "f=l^-1" in out and "g=l^2" in out


def test_examples_json(capsys):
    code, out, _ = run(capsys, "examples", "--format", "json")
    assert code == 0
    ids = [json.loads(l)["id"] for l in out.splitlines()]
    assert ids == ["ex1", "ex2_g0", "ex2_g1", "ex2_g2",
                   "ex3_g0", "ex3_gm1", "ex3_g1"]


# --------------------------------------------------------------------- usage

def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "--grid", "gigantic")[0] == 2
