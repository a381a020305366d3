import pytest

import golden as G
from ptwell.actions import ActionEvaluator, action_I, action_J, action_set, dI_de, dI_dE

GRID = [(E, eps) for E in (-1.04 - 0.05j, -1.02 + 0.025j, -1.0, -0.98 - 0.025j, -0.96 + 0.05j)
        for eps in (-0.01, -0.005, 0.0, 0.005, 0.01)]


def test_reference_values(quartic, well):
    a = action_set(quartic, -1.0, 0.0, well)
    assert a.I_l == pytest.approx(G.I_LEFT, rel=1e-13)
    assert a.I_r == pytest.approx(a.I_l, abs=1e-12)
    assert a.J == pytest.approx(G.J_BARRIER, rel=1e-13)
    assert a.dIl_dE == pytest.approx(G.DI_DE, rel=1e-12)
    assert 1j * a.dIl_de == pytest.approx(G.I_DI_DEPS, rel=1e-12)
    assert a.dJ_dE == pytest.approx(G.DJ_DE, rel=1e-12)


@pytest.mark.parametrize("E", sorted(G.ACTIONS_BY_E))
def test_against_oracle_table(quartic, well, E):
    I, J = G.ACTIONS_BY_E[E]
    assert action_I(quartic, "left", E, 0.0, well) == pytest.approx(I, rel=1e-12)
    assert action_J(quartic, E, 0.0, well) == pytest.approx(J, rel=1e-12)


def test_real_positive_at_real_energy(ev):
    a = ev.action_set(-1.02, 0.0)
    for v in (a.I_l, a.I_r, a.J):
        assert abs(v.imag) < 1e-10 and v.real > 0
    assert a.dIl_dE.real > 0 and abs(a.dIl_dE.imag) < 1e-10
    assert (1j * a.dIl_de).real < 0 and abs((1j * a.dIl_de).imag) < 1e-10
    assert a.dIl_dE == pytest.approx(a.dIr_dE, abs=1e-12)


def test_J_shrinks_toward_barrier_top(ev):
    vals = [ev.J(E, 0.0).real for E in (-0.5, -0.25, -0.1)]
    assert vals[0] > vals[1] > vals[2] > 0


@pytest.mark.parametrize("E,eps", GRID)
def test_symmetries(ev, E, eps):
    E = complex(E)
    a = ev.action_set(E, eps)
    star = ev.action_set(E.conjugate(), -eps)
    dag = ev.action_set(E.conjugate(), eps)
    tol = 1e-10
    assert abs(star.I_l - a.I_l.conjugate()) < tol
    assert abs(star.I_r - a.I_r.conjugate()) < tol
    assert abs(star.J - a.J.conjugate()) < tol
    assert abs(a.I_r - dag.I_l.conjugate()) < tol
    assert abs(a.J - dag.J.conjugate()) < tol
    assert abs(a.dIr_de - dag.dIl_de.conjugate()) < tol


@pytest.mark.parametrize("E,eps", [(-1.0, 0.0), (-1.02 + 0.03j, 0.005)])
def test_node_doubling(quartic, well, E, eps):
    a = ActionEvaluator(quartic, well, n=64).action_set(E, eps).as_flat_dict()
    b = ActionEvaluator(quartic, well, n=128).action_set(E, eps).as_flat_dict()
    for key in a:
        if key in ("n_nodes", "residual", "E_re", "E_im", "eps"):
            continue
        assert abs(a[key] - b[key]) <= 1e-12 * max(1.0, abs(b[key])), key


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("E,eps", [(-1.0, 0.0), (-0.98 + 0.02j, 0.004)])
def test_derivatives_match_finite_differences(ev, side, E, eps):
    d = 1e-6
    fd_E = (ev.I(side, E + d, eps) - ev.I(side, E - d, eps)) / (2 * d)
    assert abs(fd_E - ev.dI_dE(side, E, eps)) <= 1e-7 * abs(fd_E)
    fd_e = (ev.I(side, E, eps + d) - ev.I(side, E, eps - d)) / (2 * d)
    assert abs(fd_e - ev.dI_de(side, E, eps)) <= 1e-7 * abs(fd_e)
    fd_J = (ev.J(E + d, eps) - ev.J(E - d, eps)) / (2 * d)
    assert abs(fd_J - ev.dJ_dE(E, eps)) <= 1e-7 * abs(fd_J)


def test_taylor_remainder_in_eps(ev):
    eps = 1e-3
    lin = ev.I("left", -1.0, 0.0) + eps * ev.dI_de("left", -1.0, 0.0)
    assert abs(ev.I("left", -1.0, eps) - lin) <= 10 * eps ** 2


def test_taylor_remainder_halves_quadratically(ev):
    E = -1.0 + 0.01j
    errs = []
    for d in (1e-2, 5e-3, 2.5e-3):
        errs.append(abs(ev.I("left", E + d, 0.0) - ev.I("left", E, 0.0) - d * ev.dI_dE("left", E, 0.0)))
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


def test_module_functions_agree_with_evaluator(quartic, well, ev):
    E, eps = -1.01 + 0.01j, 2e-3
    assert action_I(quartic, "r", E, eps, well) == pytest.approx(ev.I("right", E, eps), abs=1e-14)
    assert dI_dE(quartic, "l", E, eps, well) == pytest.approx(ev.dI_dE("left", E, eps), abs=1e-14)
    assert dI_de(quartic, "left", E, eps, well) == pytest.approx(ev.dI_de("left", E, eps), abs=1e-14)


def test_flat_dict_keys(ev):
    d = ev.action_set(-1.0, 0.0).as_flat_dict()
    assert {"I_l_re", "I_l_im", "dJ_dE_im", "residual"} <= set(d)
    assert list(d)[0] == "I_l_re"
