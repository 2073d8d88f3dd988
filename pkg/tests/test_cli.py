import json
import subprocess
import sys

import numpy as np
import pytest

from conelab import cli


def run_json(argv, capsys, expect=0):
    code, report = cli.run(argv)
    out = capsys.readouterr().out
    assert code == expect
    return json.loads(out) if out.strip() else None


def test_protocol_threshold(capsys):
    obj = run_json(["protocol", "--alg1", "R", "--alg2", "O", "--threshold"], capsys)
    assert obj["results"]["threshold"] == pytest.approx(0.125, abs=1e-12)
    obj = run_json(["protocol", "--alg1", "Csplit", "--alg2", "H", "--alpha", "1", "--beta", "0.1"], capsys)
    assert obj["results"]["step"][1] == pytest.approx(0.072)


def test_witness_and_certificate_round_trip(tmp_path, capsys):
    out = tmp_path / "w.json"
    code, _ = cli.run(["witness", "--n", "2", "--k", "2", "--certify", "--out", str(out)])
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["results"]["sq_norm"] == 2
    assert obj["results"]["pairing"] == pytest.approx(-1.0)
    obj = run_json(["certify", "--input", str(out)], capsys)
    assert obj["results"]["all_valid"] and len(obj["results"]["checked"]) == 1


def test_tampered_certificate_exits_one(tmp_path, capsys):
    out = tmp_path / "w.json"
    cli.run(["witness", "--n", "2", "--k", "2", "--certify", "--out", str(out)])
    obj = json.loads(out.read_text())
    obj["certificates"][0]["pairing_value"] = 0.5
    out.write_text(json.dumps(obj))
    res = run_json(["certify", "--input", str(out)], capsys, expect=1)
    assert not res["results"]["all_valid"]


def test_deterministic_output_is_byte_identical(capsys):
    argv = ["ell1break", "--cone", "psd:2", "--k", "2", "--seed", "7"]
    cli.run(argv)
    first = capsys.readouterr().out
    cli.run(argv)
    assert capsys.readouterr().out == first


def test_environment_seed_takes_precedence(monkeypatch, capsys):
    monkeypatch.setenv("CONELAB_SEED", "11")
    obj = run_json(["ell1break", "--cone", "spin:3", "--k", "1", "--seed", "3"], capsys)
    assert obj["config"]["seed"] == 11
    monkeypatch.setenv("CONELAB_SEED", "eleven")
    assert cli.run(["witness", "--n", "1", "--k", "1"])[0] == 2


def test_tau_csv(capsys):
    code, _ = cli.run(["tau", "--space", "l2:2", "--k-max", "2", "--output", "csv"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert code == 0 and lines[0] == "k,lower,upper"
    k1 = lines[1].split(",")
    assert float(k1[1]) == 1.0 and float(k1[2]) == 2.0
    assert float(lines[2].split(",")[1]) == pytest.approx(np.sqrt(2))


def test_csv_unavailable_is_usage_error(capsys):
    code, _ = cli.run(["witness", "--n", "2", "--k", "2", "--output", "csv"])
    assert code == 2


def test_norm_commands(tmp_path, capsys):
    f = tmp_path / "P.json"
    f.write_text(json.dumps([[1.0, 1.0], [0.0, 0.0]]))
    obj = run_json(["norm", "--kind", "nuclear", "--space", "l1:2", "--input", str(f)], capsys)
    assert obj["results"]["value"] == 1.0
    f.write_text(json.dumps([[1.0, 0.0], [0.0, -1.0]]))
    obj = run_json(["norm", "--kind", "eps", "--space", "l1", "--dim", "2", "--file", str(f)], capsys)
    assert obj["results"]["value"] == 2.0
    obj = run_json(["norm", "--kind", "projective", "--space", "l2:2", "--input", str(f)], capsys)
    assert obj["results"]["value"] == pytest.approx(2.0)
    assert cli.run(["norm", "--kind", "injective", "--space", "l2:2"])[0] == 2


def test_sinkhorn_command(capsys):
    obj = run_json(["sinkhorn", "--cone", "psd:2", "--seed", "1"], capsys)
    assert obj["results"]["residual_unital"] <= 1e-9
    assert obj["results"]["residual_trace"] <= 1e-9


def test_ell1break_rejection_emits_violation(tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text(json.dumps([[1.0, 0, 0], [0, 2.0, 0]]))
    obj = run_json(["ell1break", "--cone", "spin:3", "--k", "1", "--input", str(f)], capsys, expect=1)
    assert not obj["results"]["accepted"]
    cert = obj["certificates"][0]
    assert cert["kind"] == "membership_max_violation"
    out = tmp_path / "r.json"
    out.write_text(json.dumps(obj))
    assert run_json(["certify", "--input", str(out)], capsys)["results"]["all_valid"]


def test_factorize_command(capsys):
    obj = run_json(["factorize", "--map", "breuer-hall"], capsys)
    assert obj["results"]["accepted"] and obj["results"]["k"] == 5
    assert obj["results"]["residual"] <= 1e-10
    obj = run_json(["factorize", "--map", "reduction:2"], capsys)
    assert obj["results"]["k"] == 3


def test_factorize_refusal(tmp_path, capsys):
    from conelab import jordan, psdmaps

    y0 = jordan.coords_from_matrices(np.eye(2, dtype=complex))
    y1 = jordan.coords_from_matrices(np.diag([1.0, -1.0]).astype(complex))
    P = psdmaps.HermMap(2, 2, 2 * np.outer(y0, y0) + np.outer(y1, y1))
    f = tmp_path / "map.json"
    f.write_text(json.dumps(P.to_json()))
    obj = run_json(["factorize", "--map", str(f)], capsys)
    assert not obj["results"]["accepted"] and obj["results"]["offending"]


def test_membership_commands(tmp_path, capsys):
    f = tmp_path / "xs.json"
    f.write_text(json.dumps([np.eye(2).tolist(), (np.sqrt(2) * np.diag([1.0, -1.0])).tolist()]))
    obj = run_json(["membership", "--psd-lorentz", str(f), "--starts", "20"], capsys)
    assert not obj["results"]["member"] and obj["certificates"]
    f.write_text(json.dumps(np.eye(4).tolist()))
    obj = run_json(["membership", "--qubit", str(f)], capsys)
    assert obj["results"]["in_check"]
    f.write_text(json.dumps([[1, 1], [1, -2]]))
    obj = run_json(["membership", "--ell1-factor", str(f), "--cone", "simplex:2"], capsys)
    assert obj["results"]["violating_sign"] == [1]
    assert cli.run(["membership"])[0] == 2


def test_usage_errors(capsys):
    assert cli.run(["bogus"])[0] == 2
    assert cli.run(["witness", "--n", "2"])[0] == 2
    assert cli.run(["witness", "--n", "0", "--k", "2"])[0] == 2
    assert cli.run(["sinkhorn", "--cone", "cube:3"])[0] == 2


def test_suite_quick_subset(capsys):
    code, report = cli.run(["suite", "--quick", "--only", "1,2,3"])
    captured = capsys.readouterr()
    assert code == 0 and report.results["all_passed"]
    assert captured.err.count("[PASS]") == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "conelab", "witness", "--n", "2", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["sq_norm"] == 2
