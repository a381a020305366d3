import csv
import re

import numpy as np
import pytest

from ptwell import harness as H
from ptwell.config import GridConfig, OutputConfig, RunConfig, SweepConfig, WindowConfig
from ptwell.stokes import trace_family
from ptwell.numerics import Rectangle


@pytest.fixture(scope="module")
def small_cfg():
    return RunConfig(
        E0=-1.0, grid=GridConfig(L=0.0, N=2000), sweep=SweepConfig(h=(0.2,), eps=(0.0, 1e-4)),
        window=WindowConfig(center=(-1.0, 0.0), half_width=0.1, half_height=1e-3, im_growth=3.0),
        output=OutputConfig(formats=("csv", "svg")),
    ).validate()


@pytest.fixture(scope="module")
def sweep_dir(small_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    res = H.run_sweep(small_cfg, out)
    return out, res


def test_auto_half_width(small_cfg):
    g = H.grid_of(small_cfg, H.potential_of(small_cfg))
    assert 3.5 < g.L < 4.5 and g.N == 2000


def test_spectrum_csv_contract(small_cfg, sweep_dir):
    out, res = sweep_dir
    text = (out / "spectrum.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == "method,h,epsilon,re_lambda,im_lambda,residual,config_hash"
    rows, hashes = H.read_spectrum_csv(out / "spectrum.csv")
    assert hashes == {small_cfg.config_hash()}
    assert rows == sorted(rows, key=lambda r: (r[1], r[2], r[3], r[4], r[0]))
    assert len(rows) == sum(len(c.pairs) for c in res.cells) == 4
    assert all(abs(r[4]) < 1e-9 for r in rows if r[2] == 0.0)
    assert (out / "errors.csv").read_text().splitlines() == ["h,epsilon,stage,error,config_hash"]


def test_rerun_is_byte_identical(small_cfg, sweep_dir, tmp_path):
    out, _ = sweep_dir
    H.run_sweep(small_cfg, tmp_path, threads=2)
    assert (tmp_path / "spectrum.csv").read_bytes() == (out / "spectrum.csv").read_bytes()


def test_compare_report(small_cfg, sweep_dir):
    _, res = sweep_dir
    report = H.compare_spectrum(small_cfg, sweep=res)
    assert len(report.cells) == 2
    for c in report.cells:
        assert c.cardinality_ok and c.certified
        assert len(c.matched) == 2 and not c.unmatched_fd and not c.unmatched_wkb
        assert c.max_delta <= 0.05 * c.h


def test_compare_refuses_foreign_sweep(small_cfg, sweep_dir):
    _, res = sweep_dir
    other = RunConfig(E0=-1.0, sweep=SweepConfig(h=(0.2,), eps=(0.0,))).validate()
    with pytest.raises(ValueError):
        H.compare_spectrum(other, sweep=res)


def test_greedy_match():
    pairs, ua, ub = H.greedy_match([0.0, 1.0, 5.0], [1.1, 0.05])
    assert sorted(pairs) == [(0, 1), (1, 0)] and ua == [2] and ub == []


def test_wkb_rows(small_cfg):
    cell = H.wkb_cell(small_cfg, 0.2, 0.0)
    rows = H.wkb_rows(cell)
    assert [r[0] for r in rows].count("wkb") == 2
    assert [r[0] for r in rows].count("bs") == 2


def test_figure_panels_match_csv(small_cfg, tmp_path):
    res = H.figure1(small_cfg, tmp_path)
    svg = res.svg_path.read_text()
    assert len(res.panels) == len(small_cfg.sweep.eps)
    with open(res.csv_path) as fh:
        n_rows = sum(1 for _ in csv.DictReader(fh))
    assert len(re.findall(r'class="pt"', svg)) == n_rows
    assert small_cfg.config_hash() in svg
    assert svg.count('class="panel"') == len(res.panels)


def test_threshold_csv(tmp_path):
    r = H.ThresholdResult(-1.0, 0.2, 5.6e-8, 5.3e-8, 2.4e-7, (-1 + 0j, -1 + 0j))
    H.write_threshold_csv(tmp_path / "t.csv", [r], "abc")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "E1,h,eps_c_model,eps_star_fd,ratio,config_hash"
    assert lines[1].endswith(",abc") and float(lines[1].split(",")[4]) == pytest.approx(5.6 / 5.3)


def test_stokes_csv(quartic, well, tmp_path):
    curves = trace_family(quartic, -1.0, 0.0, well, Rectangle(0j, 4.0, 4.0), step=0.02)
    H.write_stokes_csv(tmp_path / "s.csv", curves)
    with open(tmp_path / "s.csv") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == ["curve_id", "origin", "kind", "k", "s", "re_z", "im_z"]
        rows = list(reader)
    assert len({r["curve_id"] for r in rows}) == 24
    assert {r["kind"] for r in rows} == {"stokes", "anti-stokes"}


def test_fit_log_threshold_recovers_slope():
    hs = [0.15, 0.2, 0.25]
    rs = [H.ThresholdResult(-1.0, h, 3.0 * np.exp(-2.5 / h), 1.0, 0.0, (0j, 0j)) for h in hs]
    assert H.fit_log_threshold(rs) == pytest.approx(-2.5, rel=1e-12)
