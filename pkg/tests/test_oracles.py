"""The frozen golden values are reproducible from the independent quadrature oracle."""

import math

import pytest

import golden as G
import oracles as O


def test_actions_at_reference():
    assert O.I_left(-1.0) == pytest.approx(G.I_LEFT, rel=1e-13)
    assert O.J(-1.0) == pytest.approx(G.J_BARRIER, rel=1e-13)
    assert O.dI_dE_left(-1.0) == pytest.approx(G.DI_DE, rel=1e-12)
    assert O.i_dI_deps_left(-1.0) == pytest.approx(G.I_DI_DEPS, rel=1e-12)
    assert O.dJ_dE(-1.0) == pytest.approx(G.DJ_DE, rel=1e-12)


def test_coupling_closed_form():
    # for this quartic the substitution u = x^2 makes i dI/deps independent of E
    assert G.I_DI_DEPS == pytest.approx(-math.pi / (4 * math.sqrt(0.05)), rel=1e-14)


@pytest.mark.parametrize("E", sorted(G.ACTIONS_BY_E))
def test_actions_table(E):
    I, J = G.ACTIONS_BY_E[E]
    assert O.I_left(E) == pytest.approx(I, rel=1e-13)
    assert O.J(E) == pytest.approx(J, rel=1e-13)


def test_model_threshold_from_oracle():
    from scipy.optimize import brentq

    h = 0.2
    k = round(O.I_left(-1.0) / h / math.pi - 0.5)
    Ec = brentq(lambda E: O.I_left(E) / h - (k + 0.5) * math.pi, -1.2, -0.9, xtol=1e-15)
    assert Ec == pytest.approx(G.MODEL_E_C_H02, abs=1e-13)
    val = math.exp(-O.J(Ec) / h) / (2 * abs(O.i_dI_deps_left(Ec)))
    assert val == pytest.approx(G.MODEL_EPS_TILDE_C_H02, rel=1e-12)
