import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

import ionjch.sweeps as sweeps
from ionjch.cli import main
from ionjch.errors import SolverError
from ionjch.observables import ObservableSet


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_crystal_two_ions(capsys):
    code, out, _ = run(capsys, "crystal", "--ions", "2", "--alpha", "0.1")
    assert code == 0
    rep = json.loads(out)
    np.testing.assert_allclose([m["lambda"] for m in rep["modes"]], [1, 3], atol=1e-12)
    np.testing.assert_allclose(rep["modes"][1]["omega_p_over_omega_x"], np.sqrt(0.99), atol=1e-12)


def test_crystal_single_ion(capsys):
    code, out, _ = run(capsys, "crystal", "--ions", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["positions"] == [0.0]
    assert rep["hopping_over_omega_x"] == []


def test_crystal_com_row(capsys):
    _, out, _ = run(capsys, "crystal", "--ions", "3", "--alpha", "0.1", "--t-scale", "0.3")
    rep = json.loads(out)
    assert rep["modes"][0]["theta"] == pytest.approx(0.0, abs=1e-14)
    assert len(rep["hopping_over_g"]) == 3


def test_crystal_unstable_chain_is_domain_error(capsys):
    code, _, err = run(capsys, "crystal", "--ions", "10", "--alpha", "0.9")
    assert code == 3
    assert "zig-zag" in err


def test_mott_schema(capsys):
    code, out, _ = run(capsys, "mott")
    assert code == 0
    header = out.splitlines()[0]
    assert header == "delta_over_g,mu_0,mu_1,mu_2,mu_3,mu_4,mu_5,dmu_0,dmu_1,dmu_2,dmu_3,dmu_4"
    rows = rows_of(out)
    assert len(rows) == 301
    at_zero = next(r for r in rows if float(r["delta_over_g"]) == 0.0)
    assert float(at_zero["mu_0"]) == -1.0
    assert all(float(r[f"dmu_{k}"]) >= 0 for r in rows for k in range(5))


def test_mott_json(capsys):
    code, out, _ = run(capsys, "mott", "--steps", "3", "--n-max", "2", "--format", "json", "--validate")
    rep = json.loads(out)
    assert code == 0
    assert rep["mu"]["0"][1] == -1.0
    assert set(rep["dmu"]) == {"0", "1"}


def test_ground_single_site(capsys):
    code, out, _ = run(capsys, "ground", "--ions", "1", "--excitations", "1", "--t", "0.3", "--delta", "0")
    rep = json.loads(out)
    assert code == 0
    assert rep["energy"] == pytest.approx(-1.0, abs=1e-14)
    assert rep["observables"]["var_qubit"][0] == pytest.approx(0.5, abs=1e-14)


def test_ground_deep_mott(capsys):
    code, out, _ = run(capsys, "ground", "--ions", "5", "--excitations", "5", "--t", "0.3", "--delta", "-15")
    rep = json.loads(out)
    assert code == 0
    assert max(rep["observables"]["var_total"]) < 0.15


def test_ground_json_round_trip(capsys):
    _, out, _ = run(capsys, "ground", "--ions", "3", "--excitations", "2", "--t", "0.2", "--delta", "0.5")
    rep = json.loads(out)
    obs = ObservableSet.from_dict(rep["observables"])
    again = json.loads(json.dumps(obs.to_dict()))
    assert again == rep["observables"]
    assert obs.var_total == tuple(rep["observables"]["var_total"])


def test_ground_missing_key_in_config(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[ground]\nions = 2\nexcitations = 2\nt = 0.3\n")
    code, _, err = run(capsys, "ground", "--config", str(cfg))
    assert code == 2
    assert "'delta'" in err


def test_config_values_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[ground]\nions = 1\nexcitations = 1\nt = 0.3\ndelta = 5.0\n")
    _, out, _ = run(capsys, "ground", "--config", str(cfg))
    assert json.loads(out)["observables"]["delta_over_g"] == 5.0
    _, out, _ = run(capsys, "ground", "--config", str(cfg), "--delta", "0")
    assert json.loads(out)["energy"] == pytest.approx(-1.0)


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[sweep]\nbogus = 1\n")
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_bad_flag_is_usage_error(capsys):
    code, _, _ = run(capsys, "ground", "--ions", "two")
    assert code == 2


def test_physical_units_need_all_inputs(capsys):
    code, _, err = run(capsys, "ground", "--ions", "2", "--excitations", "2", "--delta", "0", "--units", "physical")
    assert code == 2 and "omega_z" in err


def test_dumps(capsys, tmp_path):
    m, b = tmp_path / "m.txt", tmp_path / "b.txt"
    code, _, _ = run(
        capsys, "ground", "--ions", "2", "--excitations", "1", "--t", "0.3", "--delta", "1",
        "--dump-matrix", str(m), "--dump-basis", str(b),
    )
    assert code == 0
    mlines = m.read_text().splitlines()
    assert mlines[0] == f"% 2 1 4 {len(mlines) - 1}"
    assert b.read_text().splitlines()[0] == "% 2 1 4"


SHORT = ["--delta-min", "-2", "--delta-max", "2", "--steps", "5"]


def test_sweep_schema(capsys):
    code, out, _ = run(capsys, "sweep", *SHORT, "--classify")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[:4] == ["delta_over_g", "energy", "gap", "degenerate"]
    assert header[4:9] == ["meanN_1", "varN_1", "meanNa_1", "varNa_1", "meann_1"]
    assert len(header) == 4 + 25 + 5 + 1
    assert header[-1] == "status"
    rows = rows_of(out)
    assert len(rows) == 5
    for r in rows:
        assert abs(float(r["varN_1"]) - float(r["varN_5"])) < 1e-8
        assert r["status"] == "ok"


def test_sweep_seventeen_digits(capsys):
    _, out, _ = run(capsys, "sweep", "--ions", "2", "--excitations", "2", *SHORT)
    row = out.splitlines()[2].split(",")
    energy = row[1]
    assert float(energy) == float(format(float(energy), ".17g"))
    assert energy == format(float(energy), ".17g")


def test_sweep_deterministic_bytes(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sweep", "--ions", "3", "--excitations", "3", *SHORT, "-o", str(a))
    run(capsys, "sweep", "--ions", "3", "--excitations", "3", *SHORT, "-o", str(b), "--workers", "2")
    assert a.read_bytes() == b.read_bytes()


def test_physical_and_g_units_agree(capsys):
    # omega_z=1, omega_x=2, eta*Omega = 0.5*2 = 1: t = alpha*omega_z/2 = 0.25 exactly
    _, g_out, _ = run(capsys, "sweep", "--ions", "3", "--excitations", "3", "--t", "0.25", *SHORT)
    with pytest.warns(UserWarning, match="RWA"):
        _, p_out, _ = run(
            capsys, "sweep", "--ions", "3", "--excitations", "3", *SHORT, "--units", "physical",
            "--omega-z", "1", "--omega-x", "2", "--rabi", "2", "--lamb-dicke", "0.5",
        )
    assert g_out == p_out


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--ions", "2", "--excitations", "2", *SHORT, "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["rows"]) == 5
    assert rep["provenance"]["spec"]["n_ions"] == 2


def test_sweep_partial_failure_warns(capsys, monkeypatch):
    real = sweeps.ground_state

    def flaky(op, method="auto"):
        res = real(op, method)
        if res.energy > -3.0:
            raise SolverError("forced")
        return res

    monkeypatch.setattr(sweeps, "ground_state", flaky)
    code, out, err = run(capsys, "sweep", "--ions", "2", "--excitations", "2", "--delta-min", "-6",
                         "--delta-max", "6", "--steps", "5", "--workers", "1")
    assert code == 0
    assert "warning" in err
    assert any(r["status"].startswith("failed") for r in rows_of(out))


def test_sweep_total_failure_exit_4(capsys, monkeypatch):
    def broken(op, method="auto"):
        raise SolverError("forced")

    monkeypatch.setattr(sweeps, "ground_state", broken)
    code, _, _ = run(capsys, "sweep", "--ions", "2", "--excitations", "2", *SHORT, "--workers", "1")
    assert code == 4


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "ionjch.cli", "ground", "--ions", "1", "--excitations", "1", "--t", "0", "--delta", "2"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(out.stdout)["energy"] == pytest.approx(1 - 2**0.5)
