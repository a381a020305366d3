"""Rescaled window analysis of a colliding eigenvalue pair at leading order.

Near a level E_c of the uncoupled wells the quantization function reduces to

    f ~ m0 (eps_t^2 - eps_tc^2) + q0 (F - F_c)^2

in window coordinates E = E1 + h F, eps = h eps_t, with m0 = |dI/deps|^2,
q0 = (dI/dE)^2 and eps_tc = exp(-J/h) / (2 |dI/deps|), all evaluated at
(E_c, 0). Below eps_tc the two zeros are real, at eps_tc they merge, above
it they form a conjugate pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .actions import ActionEvaluator
from .errors import A7Violation
from .numerics import newton_refine
from .potential import PerturbedPotential, WellStructure

A7_FLOOR = 1e-10
DOUBLE_ROOT_RTOL = 1e-12


class PairKind(str, Enum):
    REAL_PAIR = "RealPair"
    DOUBLE_ROOT = "DoubleRoot"
    CONJUGATE_PAIR = "ConjugatePair"


@dataclass(frozen=True)
class WindowCoords:
    E1: float
    F: complex
    eps_tilde: float
    kappa_tilde: float
    h: float


def _reduce_mod_pi(x: float) -> float:
    return x - math.pi * math.floor(x / math.pi)


def to_window(E: complex, eps: float, E1: float, h: float, ref: WellStructure | None = None,
              kappa: float = 0.0, pot: PerturbedPotential | None = None,
              evaluator: ActionEvaluator | None = None) -> WindowCoords:
    """F = (E - E1)/h, eps_t = eps/h, kappa_t = kappa - I(E1, 0)/h mod pi.

    The Floquet offset needs the action, so ``kappa_tilde`` is only computed
    when an evaluator (or ``pot`` and ``ref``) is supplied; otherwise it is
    ``kappa`` reduced mod pi.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if evaluator is None and pot is not None and ref is not None:
        evaluator = ActionEvaluator(pot, ref)
    shift = evaluator.I("left", E1, 0.0).real / h if evaluator is not None else 0.0
    return WindowCoords(float(E1), (complex(E) - E1) / h, eps / h, _reduce_mod_pi(kappa - shift), h)


def from_window(wc: WindowCoords) -> tuple[complex, float]:
    return wc.E1 + wc.h * wc.F, wc.h * wc.eps_tilde


@dataclass(frozen=True)
class BifurcationModel:
    E1: float
    h: float
    eps_c: float
    eps_tilde_c: float
    q0: float
    m0: float
    J_val: float
    dIdE: float
    dIde_abs: float
    F_c: float
    E_c: float
    kappa: float
    kappa_tilde: float

    def __post_init__(self):
        if not (self.eps_tilde_c > 0 and self.q0 > 0 and self.m0 > 0):
            raise ValueError("model constants must be positive")


def critical_level(ev: ActionEvaluator, E1: float, h: float, kappa: float) -> float:
    """Real E_c solving I(E_c, 0)/h - kappa = (k + 1/2) pi for the k nearest to E1."""
    phase = ev.I("left", E1, 0.0).real / h - kappa
    k = round(phase / math.pi - 0.5)
    target = (k + 0.5) * math.pi

    def g(E):
        return ev.I("left", E, 0.0) / h - kappa - target

    def dg(E):
        return ev.dI_dE("left", E, 0.0) / h

    return newton_refine(g, dg, complex(E1), tol=1e-13 * max(1.0, abs(target)), xtol=1e-15).real


def build_model(pot: PerturbedPotential, E1: float, h: float, ref: WellStructure,
                kappa_tilde: float | None = None, evaluator: ActionEvaluator | None = None) -> BifurcationModel:
    """Leading-order threshold model for the pair near E1.

    Without ``kappa_tilde`` the Floquet offset is zero (the plain operator).
    Otherwise kappa = kappa_tilde + I(E1, 0)/h; kappa_tilde = -pi/2 puts E_c at E1.
    """
    ev = evaluator if evaluator is not None else ActionEvaluator(pot, ref)
    I1 = ev.I("left", E1, 0.0).real
    kappa = 0.0 if kappa_tilde is None else kappa_tilde + I1 / h
    E_c = critical_level(ev, E1, h, kappa)
    acts = ev.action_set(E_c, 0.0)
    a = abs(1j * acts.dIl_de)
    if a < A7_FLOOR:
        raise A7Violation(f"|dI/deps| = {a:.3e} at E={E_c}: W does not couple to the well")
    b = acts.dIl_dE.real
    J = acts.J.real
    eps_tilde_c = math.exp(-J / h) / (2 * a)
    return BifurcationModel(
        E1=float(E1), h=float(h), eps_c=h * eps_tilde_c, eps_tilde_c=eps_tilde_c,
        q0=b * b, m0=a * a, J_val=J, dIdE=b, dIde_abs=a,
        F_c=(E_c - E1) / h, E_c=E_c, kappa=kappa, kappa_tilde=_reduce_mod_pi(kappa - I1 / h),
    )


def classify(eps_tilde: float, model: BifurcationModel) -> PairKind:
    x, c = abs(eps_tilde), model.eps_tilde_c
    if abs(x - c) <= DOUBLE_ROOT_RTOL * c:
        return PairKind.DOUBLE_ROOT
    return PairKind.REAL_PAIR if x < c else PairKind.CONJUGATE_PAIR


def predicted_pair(eps_tilde: float, model: BifurcationModel) -> tuple[complex, complex]:
    """Zeros of m0 (eps_t^2 - eps_tc^2) + q0 (F - F_c)^2 mapped back to E (lower one first)."""
    if classify(eps_tilde, model) is PairKind.DOUBLE_ROOT:
        E = complex(model.E1 + model.h * model.F_c)
        return E, E
    d = -model.m0 * (eps_tilde ** 2 - model.eps_tilde_c ** 2) / model.q0
    off = math.sqrt(d) if d >= 0 else 1j * math.sqrt(-d)
    lo = model.E1 + model.h * (model.F_c - off)
    hi = model.E1 + model.h * (model.F_c + off)
    return complex(lo), complex(hi)
