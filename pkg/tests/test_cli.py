import json
import subprocess
import sys

import pytest

from wiretap import __version__
from wiretap.cli import main

XTX = "xtx(hash=gf(2,1), en1=rep(3,2), en2=rep(3,3))"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_design(capsys):
    doc = run_json(capsys, "design", "--m", "2", "--s", "1", "--p", "0.5")
    res = doc["result"]
    assert res["u"] == 4 and res["bound_ds"] == pytest.approx(0.5) and res["meets_target"]
    assert set(res) >= {"m", "s", "p", "alpha", "u", "rate", "rate2", "rate_limit", "rate2_limit", "bound_ds"}
    assert run_json(capsys, "design", "--m", "128", "--s", "128", "--p", "0.3")["result"]["u"] == 747


def test_envelope_echoes_config_and_version(capsys):
    doc = run_json(capsys, "design", "--m", "2", "--s", "1", "--p", "0.5")
    assert doc["version"] == __version__
    assert doc["config"]["seed"] == 0  # recorded even when defaulted
    assert doc["config"]["command"] == "design"


@pytest.mark.parametrize("argv", [["--m", "2", "--s", "1", "--p", "0"], ["--m", "0", "--s", "1", "--p", "0.3"]])
def test_design_rejects(capsys, argv):
    code, _, err = run(capsys, "design", *argv)
    assert code == 2 and "error" in err


def test_metric_rsr(capsys):
    doc = run_json(capsys, "metric", "rsr", "--code", "id(6)", "--chA", "bsc(0.25)^6", "--exact")
    assert doc["result"]["value"] == pytest.approx(0.75**6, abs=1e-15)
    assert doc["result"]["mode"] == "exact"


def test_metric_ds_constant_channel(capsys):
    doc = run_json(capsys, "metric", "ds", "--scheme", XTX, "--chA", "constant")
    assert doc["result"]["value"] == 0.0


def test_metric_mis_reports_tolerance(capsys):
    doc = run_json(capsys, "metric", "mis", "--scheme", "id(1)", "--chA", "bsc(0.11)", "--tol", "1e-9")
    res = doc["result"]
    assert res["mode"] == "exact" and res["params"]["tol"] == 1e-9 and res["params"]["gap"] < 1e-9
    assert res["value"] == pytest.approx(0.5000, abs=2e-3)


def test_metric_ss_and_misr(capsys):
    res = run_json(capsys, "metric", "ss", "--scheme", "rep(3)", "--chA", "bsc(0.2)")["result"]
    ss = res["restricted_exact"]["value"]
    assert res["lower"]["value"] - 1e-12 <= ss <= res["upper"]["value"] + 1e-12
    res = run_json(capsys, "metric", "misr", "--scheme", "otp(2)", "--chA", "id(2)")["result"]
    assert res["value"] == pytest.approx(0.0, abs=1e-12)


def test_metric_ds_monte_carlo(capsys):
    res = run_json(
        capsys, "metric", "ds", "--scheme", "rep(5)", "--chA", "bsc(0.3)", "--mode", "mc",
        "--pairs", "0,1", "--trials", "4000", "--seed", "7",
    )["result"]
    assert res["mode"] == "monte-carlo" and res["lower_bound"] and res["seed"] == 7
    code, _, err = run(capsys, "metric", "ds", "--scheme", "rep(5)", "--chA", "bsc(0.3)", "--mode", "mc")
    assert code == 2 and "--pairs" in err


def test_exact_mode_does_not_fall_back(capsys):
    code, out, err = run(capsys, "metric", "ds", "--scheme", "id(12)", "--chA", "bsc(0.1)", "--exact")
    assert code == 3 and out == "" and "monte-carlo" in err


def test_cap_flag_and_env(capsys, monkeypatch):
    args = ["metric", "rsr", "--code", "id(6)", "--chA", "bsc(0.25)^6"]
    assert run(capsys, *args, "--cap", "100")[0] == 3
    monkeypatch.setenv("WIRETAP_SIZE_CAP", "100")
    assert run(capsys, *args)[0] == 3
    assert run(capsys, *args, "--cap", "10000")[0] == 0


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "metric", "ds", "--scheme", "rep(3", "--chA", "bsc(0.1)")
    assert code == 2 and "position" in err


def test_missing_flag(capsys):
    assert run(capsys, "metric", "ds", "--scheme", "rep(3)")[0] == 2


def test_rate_table(capsys):
    rows = run_json(capsys, "rate-table")["result"]
    assert [r["rate_display"] for r in rows] == [0.5, 0.42, 0.34, 0.24, 0.13]
    code, out, _ = run(capsys, "rate-table", "--p", "0.5,0.05", "--out", "csv")
    assert code == 0
    assert out.splitlines() == ["p,rate,rate2", "0.5,0.5,1.0", "0.05,0.07,0.07"]
    assert run(capsys, "rate-table", "--p", "0.7")[0] == 2


def test_table_output(capsys):
    code, out, _ = run(capsys, "rate-table", "--out", "table")
    assert code == 0 and out.splitlines()[0].split() == ["p", "rate", "rate2"]
    code, out, _ = run(capsys, "design", "--m", "2", "--s", "1", "--p", "0.5", "--out", "csv")
    assert "result.u,4" in out.splitlines()


def test_simulate_noiseless(capsys):
    res = run_json(
        capsys, "simulate", "--scheme", "rep(3)", "--chR", "id(3)", "--chA", "id(3)", "--trials", "500"
    )["result"]
    assert res["de"] == 0.0 and res["adversary_message_recovery"] == 1.0


def test_simulate_xtx_matches_exact(capsys):
    from wiretap.channels import make_bsc
    from wiretap.coding import decryption_error
    from wiretap.metrics import adv_rs_r
    from wiretap.specs import parse_scheme

    s = parse_scheme(XTX)
    exact_de = decryption_error(s.encryption(), s.decoder(), make_bsc(0.05, s.n1 + s.n2)).value
    exact_rsr = adv_rs_r(s.en1, make_bsc(0.3, s.n1)).value
    res = run_json(
        capsys, "simulate", "--scheme", XTX, "--chR", "bsc(0.05)", "--chA", "bsc(0.3)",
        "--trials", "40000", "--seed", "5",
    )["result"]
    assert abs(res["de"] - exact_de) <= res["de_half_width"]
    assert res["adversary_u_recovery"] <= exact_rsr + res["adversary_u_recovery_half_width"]


def test_simulate_needs_decoder(capsys):
    assert run(capsys, "simulate", "--scheme", "otp(2)", "--chR", "id(2)", "--chA", "id(2)")[0] == 2


def test_verify_suites(capsys):
    for suite in ("probcore", "hash"):
        doc = run_json(capsys, "verify", suite)
        assert doc["result"]["failures"] == 0
        assert all(c["pass"] for c in doc["result"]["checks"])


def test_determinism(capsys):
    argv = ["simulate", "--scheme", XTX, "--chR", "bsc(0.05)", "--chA", "bsc(0.3)", "--trials", "3000", "--seed", "9"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    other = run(capsys, *argv[:-1], "10")[1]
    assert other != first


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"code": "id(4)", "chA": "bsc(0.25)^4", "out": "json"}))
    doc = run_json(capsys, "metric", "rsr", "--config", str(cfg))
    assert doc["result"]["value"] == pytest.approx(0.75**4)
    assert doc["config"]["code"] == "id(4)"
    # flags win over the file
    doc = run_json(capsys, "metric", "rsr", "--config", str(cfg), "--chA", "id(4)")
    assert doc["result"]["value"] == 1.0
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "metric", "rsr", "--config", str(cfg))[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "wiretap.cli", "design", "--m", "2", "--s", "1", "--p", "0.5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["u"] == 4
