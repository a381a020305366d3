"""Leading-order quantization function, Bohr-Sommerfeld levels and certified root finding."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from .actions import ActionEvaluator, ActionSet
from .errors import CertificationMismatch, NoConvergence, PtwellError
from .numerics import Rectangle, newton_refine, winding_count
from .potential import PerturbedPotential, WellStructure

log = logging.getLogger(__name__)

# exp(-745) is the last double above zero
_UNDERFLOW = 745.0


@dataclass(frozen=True)
class SpectralParams:
    h: float
    eps: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not (0 < self.h <= 1):
            raise ValueError("h must lie in (0, 1]")


@dataclass(frozen=True)
class BsLevel:
    k: int
    E: complex
    side: str
    residual: float


@dataclass(frozen=True)
class FRoot:
    E: complex
    multiplicity: int
    newton_residual: float
    certified: bool


def _evaluator(pot, ref, evaluator) -> ActionEvaluator:
    return evaluator if evaluator is not None else ActionEvaluator(pot, ref)


def tunnel_factor(J: complex, h: float) -> complex:
    """exp(-2J/h), flushed to zero where it would underflow."""
    x = 2 * J.real / h
    if x > _UNDERFLOW:
        return 0j
    if x < -700:
        raise PtwellError(f"tunnelling factor overflows (2 Re J / h = {x:.1f}); E is far outside the barrier regime")
    return cmath.exp(-2 * J / h)


def f_from_actions(acts: ActionSet, params: SpectralParams) -> complex:
    xl = acts.I_l / params.h - params.kappa
    xr = acts.I_r / params.h - params.kappa
    try:
        return cmath.cos(xl) * cmath.cos(xr) - 0.25 * tunnel_factor(acts.J, params.h) * cmath.sin(xl) * cmath.sin(xr)
    except OverflowError as exc:
        raise PtwellError(f"quantization function overflows at Im(I/h) = {xl.imag:.1f}, {xr.imag:.1f}") from exc


def eval_f(pot: PerturbedPotential, E: complex, params: SpectralParams, ref: WellStructure,
           evaluator: ActionEvaluator | None = None) -> complex:
    """cos(I_l/h - k) cos(I_r/h - k) - exp(-2J/h)/4 sin(I_l/h - k) sin(I_r/h - k)."""
    ev = _evaluator(pot, ref, evaluator)
    return f_from_actions(ev.action_set(E, params.eps), params)


def eval_df(pot: PerturbedPotential, E: complex, params: SpectralParams, ref: WellStructure,
            evaluator: ActionEvaluator | None = None) -> complex:
    """dF/dE assembled from the action derivatives (cross-check for the difference quotient)."""
    ev = _evaluator(pot, ref, evaluator)
    a = ev.action_set(E, params.eps)
    h = params.h
    xl, xr = a.I_l / h - params.kappa, a.I_r / h - params.kappa
    dl, dr = a.dIl_dE / h, a.dIr_dE / h
    cl, sl, cr, sr = cmath.cos(xl), cmath.sin(xl), cmath.cos(xr), cmath.sin(xr)
    t = tunnel_factor(a.J, h)
    main = -sl * dl * cr - cl * sr * dr
    tunnel = t * (-2 * a.dJ_dE / h) * sl * sr + t * (cl * dl * sr + sl * cr * dr)
    return main - 0.25 * tunnel


def _df_centered(ev: ActionEvaluator, params: SpectralParams):
    step = 1e-7 * params.h

    def df(E):
        fp = f_from_actions(ev.action_set(E + step, params.eps), params)
        fm = f_from_actions(ev.action_set(E - step, params.eps), params)
        return (fp - fm) / (2 * step)

    return df


def bs_levels(pot: PerturbedPotential, params: SpectralParams, window: Rectangle, side: str,
              ref: WellStructure, evaluator: ActionEvaluator | None = None, samples: int = 9) -> list[BsLevel]:
    """Solutions of 2 I_side(E) = (2k+1) pi h + 2 kappa h inside ``window``, sorted by k."""
    ev = _evaluator(pot, ref, evaluator)
    h, eps = params.h, params.eps
    re_lo, re_hi = window.re_bounds
    diam = np.linspace(re_lo, re_hi, samples) + 1j * window.center.imag
    vals = np.array([ev.I(side, E, eps) for E in diam])
    phase = (vals.real / h - params.kappa) / math.pi - 0.5
    k_lo, k_hi = math.ceil(phase.min()), math.floor(phase.max())
    out = []
    for k in range(k_lo, k_hi + 1):
        target = (2 * k + 1) * math.pi * h + 2 * params.kappa * h
        # linear interpolation on the sampled diameter for the seed
        seed = complex(np.interp(target / 2, vals.real, diam.real)) + 1j * window.center.imag

        def g(E):
            return 2 * ev.I(side, E, eps) - target

        def dg(E):
            return 2 * ev.dI_dE(side, E, eps)

        try:
            E = newton_refine(g, dg, seed, tol=1e-13 * max(1.0, abs(target)), xtol=1e-15)
        except (NoConvergence, PtwellError) as exc:
            log.warning("Bohr-Sommerfeld level k=%d (%s) not found: %s", k, side, exc)
            continue
        if not window.contains(E):
            continue
        out.append(BsLevel(k, E, side, abs(g(E)) / max(1.0, abs(target))))
    return out


def localization_radius(E: complex, eps: float, h: float, J_val: complex, C: float = 10.0) -> float:
    """C h min(1, max(h/eps, 1) e^{-Re J/h}) e^{-Re J/h}; eps = 0 counts as h/eps = infinity."""
    if C <= 0 or h <= 0:
        raise ValueError("C and h must be positive")
    x = J_val.real / h
    if x > _UNDERFLOW:
        return 0.0
    decay = math.exp(-x)
    if decay == 0.0:
        return 0.0
    growth = math.inf if eps == 0 else max(h / abs(eps), 1.0)
    return C * h * min(1.0, growth * decay) * decay


def gamma_slope(pot: PerturbedPotential, E_real: float, ref: WellStructure,
                evaluator: ActionEvaluator | None = None) -> float:
    """i dI/deps / dI/dE for the left well at (E_real, 0).

    The left-well level drifts like E_k(eps) ~ E_k(0) + i * slope * eps.
    """
    ev = _evaluator(pot, ref, evaluator)
    val = 1j * ev.dI_de("left", E_real, 0.0) / ev.dI_dE("left", E_real, 0.0)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val)):
        raise PtwellError(f"slope is not real at E={E_real}: {val}")
    return float(val.real)


def half_splitting(ev: ActionEvaluator, E: float, h: float) -> float:
    """Predicted half-distance h e^{-Re J/h} / (2 dI/dE) of the tunnelling pair near a level."""
    a = ev.action_set(complex(E), 0.0)
    x = a.J.real / h
    return h * math.exp(-min(x, _UNDERFLOW)) / (2 * abs(a.dIl_dE))


def _cluster(points: list[tuple[complex, float]], tol: float) -> list[list[tuple[complex, float]]]:
    clusters: list[list[tuple[complex, float]]] = []
    for z, res in points:
        for c in clusters:
            if abs(c[0][0] - z) <= tol:
                c.append((z, res))
                break
        else:
            clusters.append([(z, res)])
    return clusters


def find_f_roots(pot: PerturbedPotential, params: SpectralParams, window: Rectangle, ref: WellStructure,
                 evaluator: ActionEvaluator | None = None, strict: bool = True) -> list[FRoot]:
    """All zeros of the quantization function in ``window``, certified by the argument principle.

    Seeds are the Bohr-Sommerfeld levels of both wells, their conjugates and
    points offset by twice the tunnelling half-splitting. Roots closer than the
    dedupe tolerance are merged and their multiplicity is read from a small
    winding count. With ``strict`` a count mismatch raises CertificationMismatch;
    otherwise the roots come back with ``certified=False``.
    """
    ev = _evaluator(pot, ref, evaluator)
    h, eps = params.h, params.eps

    def f(E):
        return f_from_actions(ev.action_set(E, eps), params)

    df = _df_centered(ev, params)
    search = window.inflate(1.05)
    levels = bs_levels(pot, params, search, "left", ref, ev) + bs_levels(pot, params, search, "right", ref, ev)
    centres = sorted({round(lv.E.real, 14) for lv in levels})
    s_min = math.inf
    seeds: list[complex] = []
    for lv in levels:
        seeds += [lv.E, lv.E.conjugate()]
    for x in centres:
        s = half_splitting(ev, x, h)
        s_min = min(s_min, s)
        seeds += [x + 2 * s, x - 2 * s, complex(x, 2 * s), complex(x, -2 * s)]
    if not math.isfinite(s_min):
        s_min = h
    dedupe = max(1e-2 * s_min, 1e-10 * h)

    found: list[tuple[complex, float]] = []
    for seed in seeds:
        # |f| near a root is set by the tunnelling term; its sqrt bounds the rounding noise
        q = 0.25 * abs(tunnel_factor(ev.action_set(seed, eps).J, h))
        ftol = max(1e-8 * q, 1e-14 * math.sqrt(q), 1e-24)
        try:
            z = newton_refine(f, df, seed, tol=ftol, xtol=1e-4 * dedupe)
        except PtwellError as exc:
            log.debug("seed %s discarded: %s", seed, exc)
            continue
        if window.contains(z):
            found.append((z, abs(f(z))))

    clusters = _cluster(found, dedupe)
    centres_z = [np.mean([z for z, _ in c]) for c in clusters]
    roots = []
    for i, c in enumerate(clusters):
        z0 = complex(centres_z[i])
        others = [abs(z0 - w) for j, w in enumerate(centres_z) if j != i]
        half = min([10 * dedupe] + [0.4 * d for d in others])
        try:
            mult = winding_count(f, Rectangle(z0, half, half))
        except PtwellError:
            mult = len(c) if len(c) > 1 else 1
        if mult < 1:
            continue
        roots.append(FRoot(z0, int(mult), float(min(r for _, r in c)), False))

    total = winding_count(f, window)
    count = sum(r.multiplicity for r in roots)
    ok = total == count
    roots = [FRoot(r.E, r.multiplicity, r.newton_residual, ok) for r in roots]
    roots.sort(key=lambda r: (r.E.real, r.E.imag))
    if not ok and strict:
        raise CertificationMismatch(total, count, roots)
    return roots
