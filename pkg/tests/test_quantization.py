import cmath
import math

import numpy as np
import pytest

import golden as G
from ptwell.numerics import Rectangle, winding_count
from ptwell.quantization import (
    SpectralParams, bs_levels, eval_df, eval_f, find_f_roots, gamma_slope, localization_radius,
)

GRID = [(E, eps) for E in (-1.04 - 0.05j, -1.02 + 0.025j, -1.0, -0.98 - 0.025j, -0.96 + 0.05j)
        for eps in (-0.01, -0.005, 0.0, 0.005, 0.01)]


def test_params_validation():
    with pytest.raises(ValueError):
        SpectralParams(0.0)
    with pytest.raises(ValueError):
        SpectralParams(1.5)


def test_f_real_on_real_axis(quartic, well, ev):
    for E in np.linspace(-1.05, -0.95, 7):
        assert abs(eval_f(quartic, E, SpectralParams(0.05), well, ev).imag) < 1e-10


def test_f_at_reference_from_golden(quartic, well, ev):
    h = 0.01
    x = G.I_LEFT / h
    want = math.cos(x) ** 2 - 0.25 * math.exp(-2 * G.J_BARRIER / h) * math.sin(x) ** 2
    assert eval_f(quartic, -1.0, SpectralParams(h), well, ev) == pytest.approx(want, abs=1e-10)


def test_f_small_at_bs_level(quartic, well, ev):
    h = 0.01
    lv = bs_levels(quartic, SpectralParams(h), Rectangle(-1.0 + 0j, 0.05, 1e-3), "left", well, ev)[0]
    J = ev.J(lv.E, 0.0).real
    assert abs(eval_f(quartic, lv.E, SpectralParams(h), well, ev)) <= 0.25 * math.exp(-2 * J / h) + 1e-10


@pytest.mark.parametrize("E,eps", GRID)
def test_f_symmetries(quartic, well, ev, E, eps):
    E = complex(E)
    p = SpectralParams(0.1, eps)
    f = eval_f(quartic, E, p, well, ev)
    scale = max(1.0, abs(f))
    assert abs(eval_f(quartic, E.conjugate(), SpectralParams(0.1, -eps), well, ev) - f.conjugate()) < 1e-10 * scale
    assert abs(eval_f(quartic, E.conjugate(), p, well, ev) - f.conjugate()) < 1e-10 * scale


def test_analytic_derivative_matches_difference(quartic, well, ev):
    p = SpectralParams(0.1, 1e-3)
    E, d = -1.01 + 0.004j, 1e-6
    fd = (eval_f(quartic, E + d, p, well, ev) - eval_f(quartic, E - d, p, well, ev)) / (2 * d)
    assert abs(eval_df(quartic, E, p, well, ev) - fd) <= 1e-7 * abs(fd)


def test_bs_count_and_spacing(quartic, well, ev):
    h = 0.01
    win = Rectangle(-1.0 + 0j, 0.05, 1e-3)
    levels = bs_levels(quartic, SpectralParams(h), win, "left", well, ev)
    dI = G.ACTIONS_BY_E[-0.95][0] - G.ACTIONS_BY_E[-1.05][0]
    assert abs(len(levels) - dI / (math.pi * h)) <= 1
    assert all(abs(lv.E.imag) < 1e-10 for lv in levels)
    for a, b in zip(levels, levels[1:]):
        want = math.pi * h / ev.dI_dE("left", a.E, 0.0).real
        assert abs((b.E - a.E).real - want) <= 0.1 * want
        assert b.k == a.k + 1
    for lv in levels:
        assert abs(2 * ev.I("left", lv.E, 0.0) - (2 * lv.k + 1) * math.pi * h) <= 1e-12 * max(1, lv.k)


def test_localization_radius_formula():
    h = 0.1
    assert localization_radius(-1, 0.0, h, 5 * h, C=1) == pytest.approx(h * math.exp(-5), rel=1e-14)
    assert localization_radius(-1, h, h, 5 * h, C=1) == pytest.approx(h * math.exp(-10), rel=1e-14)
    assert localization_radius(-1, 0.0, h, 800 * h) == 0.0


def test_gamma_slope(quartic, well, ev):
    s = gamma_slope(quartic, -1.0, well, ev)
    assert s == pytest.approx(G.GAMMA_SLOPE, rel=1e-12)
    flipped = quartic.with_w([0.0, -1.0])
    assert gamma_slope(flipped, -1.0, well) == pytest.approx(-s, rel=1e-12)


def test_roots_near_bs_levels_h001(quartic, well, ev):
    h = 0.01
    win = Rectangle(-1.2 + 0j, 0.045, 1e-3)
    p = SpectralParams(h)
    roots = find_f_roots(quartic, p, win, well, ev)
    levels = bs_levels(quartic, p, win, "left", well, ev)
    assert sum(r.multiplicity for r in roots) == 2 * len(levels)
    for r in roots:
        dist = min(abs(r.E - lv.E) for lv in levels)
        J = ev.J(r.E, 0.0)
        # the radius is far below double resolution here; allow a few ulps
        assert dist <= max(localization_radius(r.E, 0.0, h, J, 10.0), 8 * np.spacing(abs(r.E)))


def test_conjugate_pairs_above_threshold(quartic, well, ev):
    roots = find_f_roots(quartic, SpectralParams(0.2, 1e-3), Rectangle(-1.0 + 0j, 0.1, 0.01), well, ev)
    assert len(roots) == 2 and all(r.certified for r in roots)
    lo, hi = sorted((r.E for r in roots), key=lambda z: z.imag)
    assert abs(lo - hi.conjugate()) < 1e-9 and hi.imag > 0


def test_winding_stable_under_inflation(quartic, well, ev):
    p = SpectralParams(0.2)
    win = Rectangle(-1.0 + 0j, 0.1, 1e-3)

    def f(E):
        return eval_f(quartic, E, p, well, ev)

    assert winding_count(f, win) == winding_count(f, win.inflate(1.01)) == 2


def test_splitting_shrinks_with_h(quartic, well, ev):
    # a Floquet offset pins one level at E = -1 for every h, so J stays fixed
    splits = []
    h = 0.2
    I1 = ev.I("left", -1.0, 0.0).real
    for _ in range(4):
        p = SpectralParams(h, 0.0, I1 / h - math.pi / 2)
        roots = find_f_roots(quartic, p, Rectangle(-1.0 + 0j, 0.02, 1e-3), well, ev)
        xs = sorted((r.E for r in roots for _ in range(r.multiplicity)), key=lambda z: abs(z + 1.0))[:2]
        r = localization_radius(-1.0, 0.0, h, ev.J(-1.0, 0.0), 10.0)
        d = abs(xs[0] - xs[1])
        assert d <= 2 * r
        splits.append(d)
        h /= 1.2
    assert all(a > b for a, b in zip(splits, splits[1:]))
