"""Action integrals I_l, I_r, J and their E- and eps-derivatives.

Each integral runs along the straight segment between two labelled turning
points a, b. Writing the integrand's square as (t-a)(b-t) G(t), the endpoint
square-root behaviour is absorbed into a Chebyshev weight and only the
smooth factor sqrt(G) is sampled:

    int_a^b ((t-a)(b-t) G)^(1/2) dt  = ((b-a)/2)^2 * sum w2_j sqrt(G(t_j))
    int_a^b ((t-a)(b-t) G)^(-1/2) dt = sum w1_j / sqrt(G(t_j))

(second- and first-kind rules). The branch of sqrt(G) is carried by
continuity along the nodes from the segment midpoint, and the midpoint value
itself is carried by continuity in (E, eps) from the reference configuration
(E0, 0), where every integrand is real and positive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import BranchJump
from .numerics import ComplexPolynomial, chebyshev_rule
from .potential import PerturbedPotential, WellStructure
from .turning import TurningPoints, continue_path, turning_points

DEFAULT_NODES = 128
HOMOTOPY_STEPS = 8

# segment name -> (start label, end label, sign of G); I_r runs from beta_r to alpha_r
SEGMENTS = {
    "l": ("alpha_l", "beta_l", 1.0),
    "r": ("beta_r", "alpha_r", 1.0),
    "J": ("beta_l", "beta_r", -1.0),
}


@dataclass(frozen=True)
class ActionSet:
    I_l: complex
    I_r: complex
    J: complex
    dIl_dE: complex
    dIr_dE: complex
    dIl_de: complex
    dIr_de: complex
    dJ_dE: complex
    E: complex
    eps: float
    n_nodes: int
    residual: float = 0.0

    def as_flat_dict(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("E",) or isinstance(v, complex):
                v = complex(v)
                out[f"{f.name}_re"] = v.real
                out[f"{f.name}_im"] = v.imag
            else:
                out[f.name] = v
        return out


def _smooth_factor(P: ComplexPolynomial, Q: ComplexPolynomial, a: complex, b: complex, t: np.ndarray) -> np.ndarray:
    """G(t) = (V-E)/((t-a)(t-b)); deflated quotient near the endpoints, direct ratio elsewhere."""
    ta, bt = t - a, b - t
    near = (np.abs(ta) < 1e-3 * abs(b - a)) | (np.abs(bt) < 1e-3 * abs(b - a))
    G = np.empty_like(t)
    G[near] = Q(t[near])
    far = ~near
    G[far] = -P(t[far]) / (ta[far] * bt[far])
    return G


def _continued_roots(G_mid: complex, S_mid: complex, half: complex, G: np.ndarray) -> np.ndarray:
    """half*sqrt(G) at the (increasing) nodes, continuous with the oriented midpoint value."""
    n = len(G)
    out = np.empty(n, dtype=complex)
    mid = n // 2
    # walk right from the midpoint, then left
    for idx in (np.arange(mid, n), np.arange(mid - 1, -1, -1)):
        if idx.size == 0:
            continue
        Gs = np.concatenate([[G_mid], G[idx]])
        if np.any(np.abs(np.angle(Gs[1:] / Gs[:-1])) > math.pi / 2):
            raise BranchJump("G turns by more than pi/2 between adjacent nodes")
        raw = half * np.sqrt(Gs)
        raw[0] = S_mid
        flips = np.sign(np.real(np.conj(raw[:-1]) * raw[1:]))
        flips[flips == 0] = 1.0
        out[idx] = raw[1:] * np.cumprod(flips)
    return out


class ActionEvaluator:
    """Evaluates action integrals with branch anchoring at (E0, 0).

    The most recent (E, eps) state is cached, so nearby evaluations (Newton
    iterations, contour sampling) continue from it instead of repeating the
    homotopy from (E0, 0). Instances are not meant to be shared across threads.
    """

    def __init__(self, pot: PerturbedPotential, ref: WellStructure, n: int = DEFAULT_NODES,
                 polydisc: tuple[float, float] | None = None):
        self.pot = pot
        self.ref = ref
        self.n = n
        self.polydisc = polydisc
        self.rule1 = chebyshev_rule("first", n)
        self.rule2 = chebyshev_rule("second", n)
        self._poly_cache: tuple = (None, {})
        tp0 = turning_points(pot, ref.E0, 0.0, ref)
        mids0 = {}
        for name, raw in self._raw_mids(tp0).items():
            mids0[name] = raw if raw.real > 0 else -raw
        self._anchor = (complex(ref.E0), 0.0, tp0, mids0)
        self._cache = self._anchor

    # -- branch bookkeeping -------------------------------------------------
    def _segment_polys(self, tp: TurningPoints, name: str):
        cached_tp, polys = self._poly_cache
        if cached_tp is not tp:
            polys = {}
            self._poly_cache = (tp, polys)
        if name not in polys:
            polys[name] = self._build_segment(tp, name)
        return polys[name]

    def _build_segment(self, tp: TurningPoints, name: str):
        start, end, sign = SEGMENTS[name]
        a, b = getattr(tp, start), getattr(tp, end)
        P = self.pot.shifted(tp.E, tp.eps)
        Q = P.deflate(a).deflate(b)
        return P, Q, a, b, sign

    def _raw_mids(self, tp: TurningPoints) -> dict[str, complex]:
        out = {}
        for name in SEGMENTS:
            P, Q, a, b, sign = self._segment_polys(tp, name)
            out[name] = (b - a) / 2 * cmath.sqrt(sign * Q(0.5 * (a + b)))
        return out

    @staticmethod
    def _orient(raw: dict, prev: dict, strict: bool) -> dict | None:
        out = {}
        for name, r in raw.items():
            p = prev[name]
            c = (np.conj(p) * r).real / (abs(p) * abs(r))
            if strict and abs(c) < 0.5:
                return None
            out[name] = r if c >= 0 else -r
        return out

    def _step(self, state, E, eps, depth=0):
        E0, eps0, tp0, mids0 = state
        tp = continue_path(self.pot, [(E, eps)], tp0)[-1]
        mids = self._orient(self._raw_mids(tp), mids0, strict=True)
        if mids is None:
            if depth > 10:
                raise BranchJump(f"midpoint branch not resolvable on the way to E={E}, eps={eps}")
            half = self._step(state, 0.5 * (E0 + E), 0.5 * (eps0 + eps), depth + 1)
            return self._step(half, E, eps, depth + 1)
        return (complex(E), float(eps), tp, mids)

    def state(self, E: complex, eps: float):
        E = complex(E)
        eps = float(eps)
        if self.polydisc is not None:
            turning_points(self.pot, E, eps, self.ref, polydisc=self.polydisc)
        cE, ceps, ctp, _ = self._cache
        if cE == E and ceps == eps:
            return self._cache
        if abs(E - cE) + abs(eps - ceps) <= 0.1 * ctp.min_separation():
            st = self._step(self._cache, E, eps)
        else:
            st = self._anchor
            E0 = st[0]
            for k in range(1, HOMOTOPY_STEPS + 1):
                st = self._step(st, E0 + (E - E0) * k / HOMOTOPY_STEPS, eps * k / HOMOTOPY_STEPS)
        self._cache = st
        return st

    def turning(self, E: complex, eps: float) -> TurningPoints:
        return self.state(E, eps)[2]

    # -- integrals -------------------------------------------------------------
    def _segment_values(self, tp, mids, name, rule):
        P, Q, a, b, sign = self._segment_polys(tp, name)
        half = (b - a) / 2
        t = 0.5 * (a + b) + half * rule.nodes
        G = sign * _smooth_factor(P, Q, a, b, t)
        G_mid = sign * Q(0.5 * (a + b))
        S = _continued_roots(G_mid, mids[name], half, G)
        return t, S, half

    def _well(self, tp, mids, name, need=("I", "dE", "de")):
        out = {}
        if "I" in need:
            _, S2, half = self._segment_values(tp, mids, name, self.rule2)
            out["I"] = complex(half * np.dot(self.rule2.weights, S2))
        if "dE" in need or "de" in need:
            t1, S1, half = self._segment_values(tp, mids, name, self.rule1)
            inv = self.rule1.weights * half / S1
            out["dE"] = complex(0.5 * inv.sum())
            out["de"] = complex(np.dot(inv, self.pot.eval_W(t1)) / 2j)
        return out

    def I(self, side: str, E: complex, eps: float) -> complex:
        _, _, tp, mids = self.state(E, eps)
        return self._well(tp, mids, _side(side), need=("I",))["I"]

    def dI_dE(self, side: str, E: complex, eps: float) -> complex:
        _, _, tp, mids = self.state(E, eps)
        return self._well(tp, mids, _side(side), need=("dE",))["dE"]

    def dI_de(self, side: str, E: complex, eps: float) -> complex:
        _, _, tp, mids = self.state(E, eps)
        return self._well(tp, mids, _side(side), need=("de",))["de"]

    def J(self, E: complex, eps: float) -> complex:
        _, _, tp, mids = self.state(E, eps)
        _, S2, half = self._segment_values(tp, mids, "J", self.rule2)
        return complex(half * np.dot(self.rule2.weights, S2))

    def dJ_dE(self, E: complex, eps: float) -> complex:
        _, _, tp, mids = self.state(E, eps)
        _, S1, half = self._segment_values(tp, mids, "J", self.rule1)
        return complex(-0.5 * np.dot(self.rule1.weights, half / S1))

    def action_set(self, E: complex, eps: float) -> ActionSet:
        _, _, tp, mids = self.state(E, eps)
        left = self._well(tp, mids, "l")
        right = self._well(tp, mids, "r")
        _, S2, half = self._segment_values(tp, mids, "J", self.rule2)
        _, S1, _ = self._segment_values(tp, mids, "J", self.rule1)
        return ActionSet(
            I_l=left["I"], I_r=right["I"],
            J=complex(half * np.dot(self.rule2.weights, S2)),
            dIl_dE=left["dE"], dIr_dE=right["dE"],
            dIl_de=left["de"], dIr_de=right["de"],
            dJ_dE=complex(-0.5 * np.dot(self.rule1.weights, half / S1)),
            E=complex(E), eps=float(eps), n_nodes=self.n, residual=tp.residual,
        )


def _side(side: str) -> str:
    if side in ("l", "left"):
        return "l"
    if side in ("r", "right"):
        return "r"
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def action_I(pot, side, E, eps, ref, n=DEFAULT_NODES) -> complex:
    return ActionEvaluator(pot, ref, n).I(side, E, eps)


def action_J(pot, E, eps, ref, n=DEFAULT_NODES) -> complex:
    return ActionEvaluator(pot, ref, n).J(E, eps)


def dI_dE(pot, side, E, eps, ref, n=DEFAULT_NODES) -> complex:
    return ActionEvaluator(pot, ref, n).dI_dE(side, E, eps)


def dI_de(pot, side, E, eps, ref, n=DEFAULT_NODES) -> complex:
    return ActionEvaluator(pot, ref, n).dI_de(side, E, eps)


def action_set(pot, E, eps, ref, n=DEFAULT_NODES) -> ActionSet:
    return ActionEvaluator(pot, ref, n).action_set(E, eps)


def real_well_integral(pot: PerturbedPotential, E0: float, a: float, b: float, weight, n: int = DEFAULT_NODES) -> float:
    """int_a^b weight(x) (E0 - V0(x))^(-1/2) dx for real turning points a < b of V0 at E0."""
    P = pot.shifted(E0, 0.0)
    Q = P.deflate(a).deflate(b)
    rule = chebyshev_rule("first", n)
    t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes
    G = _smooth_factor(P, Q, complex(a), complex(b), t.astype(complex)).real
    return float(np.dot(rule.weights, np.asarray(weight(t), dtype=float) / np.sqrt(G)))
