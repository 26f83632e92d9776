import json
import os

import numpy as np
import pytest

from twophase.cli import main
from twophase.config import load_config, parse_config


BASE = {
    "fluids": {"rho_plus": 1.0, "rho_minus": 2.0, "mu_plus": 1.0, "mu_minus": 1.0,
               "sigma": 1.0, "gravity": 3.0},
    "numerics": {"n_modes": 64, "xi_max": 8.0, "fast": True, "seed": 7,
                 "verify_scale": 0.05},
    "data": {"d": {"preset": "gaussian"}},
    "times": [1.0, 5.0],
    "figures": False,
}


@pytest.fixture()
def cfg_file(tmp_path):
    def write(extra=None, name="cfg.json"):
        raw = json.loads(json.dumps(BASE))
        raw["output_dir"] = str(tmp_path / "out")
        if extra:
            raw.update(extra)
        path = tmp_path / name
        path.write_text(json.dumps(raw))
        return str(path)

    return write


def test_config_parsing(cfg_file):
    cfg = load_config(cfg_file())
    assert cfg.fluids.rho_minus == 2.0
    assert cfg.numerics["n_modes"] == 64
    assert cfg.d_preset.kind == "gaussian"


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"fluids": {"rho_plus": 1.0}}')
    assert main(["symbols", "--config", str(bad)]) == 2
    bad.write_text("not json")
    assert main(["symbols", "--config", str(bad)]) == 2
    assert main(["symbols", "--config", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--config", str(bad)])
    assert exc.value.code == 2


def test_times_must_ascend(cfg_file):
    with pytest.raises(Exception):
        load_config(cfg_file(extra={"times": [2.0, 1.0]}))


def test_symbols_and_calibrate(cfg_file, tmp_path):
    cfg = cfg_file()
    assert main(["calibrate", "--config", cfg]) == 0
    assert main(["symbols", "--config", cfg]) == 0
    out = tmp_path / "out"
    blob = json.loads((out / "calibration.json").read_text())
    assert 0 < blob["A0"] < 1 <= 2 <= blob["A_inf"]
    sym = json.loads((out / "symbols.json").read_text())
    assert sym["constants"]["stable_regime"] is True
    assert (out / "config_resolved.json").exists()


def test_roots_csv_columns(cfg_file, tmp_path):
    cfg = cfg_file(extra={"numerics": {**BASE["numerics"], "roots_n_A": 6}})
    assert main(["roots", "--config", cfg]) == 0
    lines = (tmp_path / "out" / "roots.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["A", "re_lambda_plus", "im_lambda_plus", "gap_to_zeta",
                      "abs_dscript", "margin_K", "margin_Res"]
    assert len(lines) == 7


def test_contours_dump(cfg_file, tmp_path):
    cfg = cfg_file()
    assert main(["contours", "dump", "--config", cfg, "--A", "0.12"]) == 0
    blob = json.loads((tmp_path / "out" / "contours.json").read_text())
    assert blob["A"] == 0.12
    names = {p["name"] for p in blob["paths"]}
    assert {"gamma0", "gamma3", "gamma_res+", "gamma6"} <= names
    from twophase.contours import ContourPath
    for pj in blob["paths"]:
        ContourPath.from_json(pj)


def test_evolve_outputs(cfg_file, tmp_path):
    cfg = cfg_file()
    assert main(["evolve", "--config", cfg]) == 0
    out = tmp_path / "out"
    assert (out / "spectral_t1.csv").exists()
    assert (out / "physical_eta_t1.csv").exists()
    header = (out / "spectral_t1.csv").read_text().splitlines()[0]
    assert header == "band,xi,x_N,component,side,re,im,t"
    diag = json.loads((out / "evolve_diagnostics.json").read_text())
    assert diag["velocity_jump_max"] <= 1e-8


def test_decay_naming_and_verdict(cfg_file, tmp_path):
    cfg = cfg_file(extra={"specs": [
        {"N": 2, "p": 1, "q": 2, "component": "H", "part": "combined",
         "tolerance": 0.12}]})
    assert main(["decay", "--config", cfg]) == 0
    out = tmp_path / "out"
    blob = json.loads((out / "decay_H_combined_p1_q2.json").read_text())
    assert blob["verdict"] == "pass"
    assert (out / "decay_H_combined_p1_q2.csv").exists()


def test_decay_empty_specs(cfg_file):
    assert main(["decay", "--config", cfg_file(extra={"specs": []})]) == 0


def test_verify_and_determinism(cfg_file, tmp_path):
    cfg = cfg_file()
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "v1")]) == 0
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "v2")]) == 0
    b1 = (tmp_path / "v1" / "verify.json").read_bytes()
    b2 = (tmp_path / "v2" / "verify.json").read_bytes()
    assert b1 == b2


def test_csv_byte_determinism(cfg_file, tmp_path):
    cfg = cfg_file(extra={"numerics": {**BASE["numerics"], "roots_n_A": 5}})
    assert main(["roots", "--config", cfg, "--out", str(tmp_path / "r1")]) == 0
    assert main(["roots", "--config", cfg, "--out", str(tmp_path / "r2")]) == 0
    assert (tmp_path / "r1" / "roots.csv").read_bytes() == \
        (tmp_path / "r2" / "roots.csv").read_bytes()


def test_structured_error_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"fluids": {"rho_plus": 1.0}}')
    assert main(["symbols", "--config", str(bad)]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    blob = json.loads(err)
    assert blob["error"] == "ConfigError"
    assert "rho_minus" in blob["message"]


def test_out_env_override(cfg_file, tmp_path, monkeypatch):
    monkeypatch.setenv("TWOPHASE_OUT", str(tmp_path / "envout"))
    cfg = cfg_file()
    assert main(["symbols", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "symbols.json").exists()


def test_parse_q_inf():
    raw = json.loads(json.dumps(BASE))
    raw["specs"] = [{"N": 2, "p": 1, "q": "inf", "component": "H", "part": "res"}]
    cfg = parse_config(raw)
    assert np.isinf(cfg.specs[0].q)
