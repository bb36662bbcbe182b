import json
import math

import pytest

from selfsim.cli import main


def read_json(out_dir, name):
    with open(out_dir / f"{name}.json") as fh:
        return json.load(fh)


def test_energy_kappa_p7(tmp_path, capsys):
    rc = main(["--out", str(tmp_path), "energy", "--n", "3", "--p", "7",
               "--profile", "kappa"])
    assert rc == 0
    data = read_json(tmp_path, "energy")
    assert data["quantity"] == "weighted_energy"
    assert abs(data["E"] - 0.034395) < 1e-5
    assert "config_hash" in data and len(data["config_hash"]) == 16


def test_gamma_7_3(tmp_path):
    rc = main(["--out", str(tmp_path), "gamma", "--n", "7", "--p", "3"])
    assert rc == 0
    data = read_json(tmp_path, "gamma")
    assert abs(data["E_singular"] - 1.0 / 15.0) < 1e-10
    assert abs(data["gap"] - 1.0 / 15.0) < 1e-10


def test_flow_constant_blowup(tmp_path):
    rc = main(["--out", str(tmp_path), "flow", "--n", "3", "--p", "3",
               "--init", "const:1.0"])
    assert rc == 0
    data = read_json(tmp_path, "flow")
    assert data["outcome"] == "blew_up"
    assert abs(data["blowup_time_estimate"] - math.log(2.0)) < 1e-2
    csv_text = (tmp_path / "flow.csv").read_text().splitlines()
    assert csv_text[0].split(",") == ["tau", "sup_norm", "weighted_avg",
                                      "energy", "dt", "min_dtau_w"]
    assert len(csv_text) > 10


def test_entropy_and_identities_kappa(tmp_path):
    rc = main(["--out", str(tmp_path), "entropy", "--n", "3", "--p", "3",
               "--profile", "kappa"])
    assert rc == 0
    data = read_json(tmp_path, "entropy")
    assert abs(data["lambda"] - 0.0625) < 1e-9
    rc = main(["--out", str(tmp_path), "identities", "--n", "7", "--p", "3",
               "--profile", "singular"])
    assert rc == 0


def test_gap_scan_writes_csv(tmp_path):
    rc = main(["--out", str(tmp_path), "gap-scan", "--n-range", "4:6",
               "--p-count", "5"])
    assert rc == 0
    data = read_json(tmp_path, "gap_scan")
    assert data["rows"] == 15 and data["all_gaps_positive"]
    lines = (tmp_path / "gap_scan.csv").read_text().splitlines()
    assert lines[0].startswith("n,p,beta")
    assert len(lines) == 16


def test_spectrum_kappa(tmp_path):
    rc = main(["--out", str(tmp_path), "spectrum", "--n", "3", "--p", "3",
               "--profile", "kappa", "--ell", "0", "--k", "3",
               "--resolution", "1500"])
    assert rc == 0
    data = read_json(tmp_path, "spectrum")
    assert max(abs(l - e) for l, e in zip(data["lambdas"], [-1.0, 0.0, 1.0])) < 1e-5


def test_subcritical_flag_rejected(tmp_path):
    rc = main(["--out", str(tmp_path), "energy", "--n", "3", "--p", "3",
               "--supercritical"])
    assert rc == 2


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "p": 3.0, "bogus_key": 1}))
    rc = main(["--out", str(tmp_path), "--config", str(cfg), "energy"])
    assert rc == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 7, "p": 3.0}))
    rc = main(["--out", str(tmp_path), "--config", str(cfg), "gamma"])
    assert rc == 0
    assert abs(read_json(tmp_path, "gamma")["E_singular"] - 1 / 15) < 1e-10
    rc = main(["--out", str(tmp_path), "--config", str(cfg), "gamma",
               "--n", "6", "--p", "5"])
    assert rc == 0
    assert abs(read_json(tmp_path, "gamma")["E_singular"] - 0.0427425842) < 1e-8


def test_determinism_same_config_same_hash(tmp_path):
    rc1 = main(["--out", str(tmp_path / "a"), "energy", "--n", "3", "--p", "7"])
    rc2 = main(["--out", str(tmp_path / "b"), "energy", "--n", "3", "--p", "7"])
    assert rc1 == rc2 == 0
    d1 = read_json(tmp_path / "a", "energy")
    d2 = read_json(tmp_path / "b", "energy")
    assert d1["config_hash"] == d2["config_hash"]
    assert d1["E"] == d2["E"]


def test_f_scan_csv(tmp_path):
    # 5 log-time points put a = 1 on the grid, where F of kappa peaks
    rc = main(["--out", str(tmp_path), "f-scan", "--n", "3", "--p", "3",
               "--profile", "kappa", "--x0-count", "3", "--t0-count", "5"])
    assert rc == 0
    data = read_json(tmp_path, "f_scan")
    assert data["grid_points"] == 15
    assert abs(data["max_F"] - 0.0625) < 1e-9
    lines = (tmp_path / "f_scan.csv").read_text().splitlines()
    assert lines[0] == "x0_norm,t0,F" and len(lines) == 16


def test_stability_verdicts(tmp_path):
    rc = main(["--out", str(tmp_path), "stability", "--n", "3", "--p", "3",
               "--profile", "kappa", "--resolution", "1500"])
    assert rc == 0
    data = read_json(tmp_path, "stability")
    assert data["verdict"] == "stable_modulo_translations"
    rc = main(["--out", str(tmp_path), "stability", "--n", "3", "--p", "3",
               "--profile", "zero", "--resolution", "1500"])
    assert rc == 0
    assert read_json(tmp_path, "stability")["verdict"] == "stable"


def test_shoot_uses_recorded_bracket(tmp_path):
    rc = main(["--out", str(tmp_path), "shoot", "--n", "3", "--p", "7"])
    assert rc == 0
    data = read_json(tmp_path, "shoot")
    assert abs(data["initial_height"] - 2.3025214117) < 1e-6
    assert data["ode_residual_sup"] <= 1e-7
    assert data["energy"] > data["kappa_energy"]
    assert (tmp_path / "shoot.csv").exists()


def test_shoot_without_bracket_for_unknown_pair(tmp_path):
    rc = main(["--out", str(tmp_path), "shoot", "--n", "4", "--p", "9"])
    assert rc == 2


def test_perturb_subcommand(tmp_path):
    rc = main(["--out", str(tmp_path), "perturb", "--n", "3", "--p", "7",
               "--profile", "shoot", "--s", "0.05"])
    assert rc == 0
    data = read_json(tmp_path, "perturb")
    assert all(m > 0 for m in data["drop_margins"].values())
    assert data["flow_outcome"] == "blew_up"
    assert data["final_resolved_energy"] < data["base_entropy"] + 1e-6
