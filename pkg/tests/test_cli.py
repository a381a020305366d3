import json

import pytest

from ptwell.cli import main

CFG = """
[grid]
N = 2000

[sweep]
h = [0.2]
eps = [0.0]

[window]
center = [-1.0, 0.0]
half_width = 0.1
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(CFG)
    return p


def test_actions_json(capsys):
    assert main(["actions", "--E=-1,0", "--eps", "0", "--h", "0.2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["I_l_re"] == pytest.approx(0.40066225976900005, rel=1e-13)
    assert data["I_l_im"] == 0.0 and "dJ_dE_im" in data and "residual" in data


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid]\nN = 7\n")
    assert main(["--config", str(bad), "actions", "--E=-1"]) == 2


def test_numerical_error_exit_code(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("E0 = 0.5\n")
    assert main(["actions", "--E=-1", "--config", str(p)]) == 3


def test_spectrum_and_strict_compare(cfg_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--config", str(cfg_file), "--out-dir", str(out), "spectrum"]) == 0
    assert (out / "spectrum.csv").exists()
    # the disc containment check is red at h = 0.2, so --strict turns that into exit 4
    assert main(["compare", "--config", str(cfg_file), "--out-dir", str(out), "--strict"]) == 4
    assert main(["compare", "--config", str(cfg_file), "--out-dir", str(out)]) == 0
    assert "max|d|" in capsys.readouterr().out


def test_wkb_roots_csv(cfg_file, capsys):
    assert main(["wkb-roots", "--config", str(cfg_file), "--h", "0.2", "--eps", "1e-8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "method,h,epsilon,re_lambda,im_lambda,residual,config_hash"
    assert sum(line.startswith("wkb,") for line in lines) == 2


def test_bifurcation_json(capsys):
    assert main(["bifurcation", "--E1", "-1", "--h", "0.2", "--eps", "1e-8,1e-6"]) == 0
    data = json.loads(capsys.readouterr().out)
    kinds = [row["kind"] for row in data["classification"]]
    assert kinds == ["RealPair", "ConjugatePair"]
    assert data["model"]["eps_tilde_c"] > 0


def test_stokes_outputs(tmp_path):
    assert main(["stokes", "--E=-1,0", "--out-dir", str(tmp_path), "--svg", "--step", "0.02"]) == 0
    assert (tmp_path / "stokes.csv").read_text().startswith("curve_id,origin,kind,k,s,re_z,im_z")
    svg = (tmp_path / "stokes.svg").read_text()
    assert "Re phi" in svg and svg.count('class="marker"') == 8
