import pytest

from ptwell.config import RunConfig, config_from_dict, figure1_config, load_config
from ptwell.errors import ConfigError

SAMPLE = """
E0 = -1.0

[potential]
v0 = [0.0, 0.0, -0.5, 0.0, 0.05]
w = [0.0, 1.0]
pt_enforced = true

[grid]
L = 8.0
N = 2000

[sweep]
h = [0.2]
eps = [0.0, 1e-4]

[window]
center = [-1.0, 0.0]
half_width = 0.1
half_height = 1e-3
im_growth = 3.0
"""


def test_load_sample(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(SAMPLE)
    cfg = load_config(path)
    assert cfg.grid.N == 2000 and cfg.sweep.eps == (0.0, 1e-4)
    assert cfg.window.center == (-1.0, 0.0)
    assert cfg.solver.m == RunConfig().solver.m


def test_hash_is_stable_and_sensitive():
    a = config_from_dict({"sweep": {"h": [0.2], "eps": [0.0]}})
    b = config_from_dict({"sweep": {"h": [0.2], "eps": [0.0]}})
    c = config_from_dict({"sweep": {"h": [0.2], "eps": [1e-4]}})
    assert a.config_hash() == b.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 12


@pytest.mark.parametrize("data", [
    {"bogus": 1},
    {"grid": {"N": 2000, "extra": 1}},
    {"grid": {"N": 2001}},
    {"grid": {"N": "many"}},
    {"sweep": {"h": [0.0]}},
    {"sweep": {"h": 0.2}},
    {"potential": {"v0": [0.0, 1.0]}},
    {"output": {"formats": ["png"]}},
    {"solver": {"m": 41}},
    {"E0": "low"},
    {"window": "wide"},
])
def test_rejects_bad_input(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid\nN = 3")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_figure1_grid():
    cfg = figure1_config()
    assert cfg.sweep.h == (0.01,)
    assert len(cfg.sweep.eps) == 20
    assert min(cfg.sweep.eps) == pytest.approx(1e-5) and max(cfg.sweep.eps) == pytest.approx(5e-2)
    assert "svg" in cfg.output.formats
