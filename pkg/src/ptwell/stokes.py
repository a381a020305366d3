"""Stokes and anti-Stokes curves of the phase phi(z) = int_tp^z (V_eps - E)^(1/2).

Convention: a Stokes curve is a level set of Re phi, an anti-Stokes curve a
level set of Im phi. Near a simple turning point both families consist of
three arcs leaving at angles 2 pi / 3 apart.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchAmbiguity, SeedCountMismatch
from .numerics import ComplexPolynomial, Rectangle, poly_roots
from .potential import PerturbedPotential, WellStructure
from .turning import LABELS, turning_points

KINDS = ("stokes", "anti-stokes")
CONVENTION = "stokes: Re phi = const; anti-stokes: Im phi = const"

_GL_LOCAL_U, _GL_LOCAL_W = np.polynomial.legendre.leggauss(32)
_GL_LOCAL_U = 0.5 * (_GL_LOCAL_U + 1.0)
_GL_LOCAL_W = 0.5 * _GL_LOCAL_W
_GL3_X, _GL3_W = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class StokesCurve:
    origin: str
    kind: str
    branch_index: int
    points: np.ndarray
    phi_drift: float
    arc: np.ndarray = field(repr=False)
    seed_angle: float = 0.0

    @property
    def length(self) -> float:
        return float(self.arc[-1] - self.arc[0]) if len(self.arc) else 0.0


def _continued_sqrt(values: np.ndarray, start: complex) -> np.ndarray:
    """Square roots of ``values`` continuous along the sequence, first one closest to ``start``."""
    raw = np.sqrt(values.astype(complex))
    out = np.empty_like(raw)
    prev = start
    for j, r in enumerate(raw):
        r = r if abs(r - prev) <= abs(r + prev) else -r
        out[j] = r
        prev = r
    return out


def local_phase_squared(P: ComplexPolynomial, tp: complex, z) -> np.ndarray:
    """phi(z)^2 for phi = int_tp^z sqrt(P), free of branch choices.

    With t = tp + u^2 (z - tp) and R = P / (t - tp):
    phi = (z - tp)^(3/2) int_0^1 2 u^2 sqrt(R(t)) du, and the square of the
    integral does not depend on the sign of the root.
    """
    R = P.deflate(tp)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    r0 = cmath.sqrt(R(tp))
    for i, zi in enumerate(z):
        w = zi - tp
        roots = _continued_sqrt(R(tp + _GL_LOCAL_U ** 2 * w), r0)
        K = np.dot(_GL_LOCAL_W, 2 * _GL_LOCAL_U ** 2 * roots)
        out[i] = w ** 3 * K * K
    return out


def seed_angles_poly(P: ComplexPolynomial, tp: complex, kind: str, r0: float, samples: int = 360) -> list[float]:
    """Directions in [0, 2 pi) in which the three curves of ``kind`` leave ``tp``.

    On the circle |z - tp| = r0, phi^2 is real exactly six times: three
    crossings with phi^2 > 0 (phi real, anti-Stokes) and three with phi^2 < 0
    (phi imaginary, Stokes). Each crossing is bisected to 1e-10 in angle.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")

    def phi2(theta):
        return local_phase_squared(P, tp, tp + r0 * np.exp(1j * np.asarray(theta)))

    theta = 2 * math.pi * np.arange(samples + 1) / samples
    im = phi2(theta).imag
    crossings = []
    for j in range(samples):
        lo, hi = theta[j], theta[j + 1]
        flo, fhi = im[j], im[j + 1]
        if flo == 0:
            crossings.append(lo)
            continue
        if flo * fhi >= 0:
            continue
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            fm = phi2(mid)[0].imag
            if fm == 0:
                lo = hi = mid
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        crossings.append(0.5 * (lo + hi))
    if len(crossings) != 6:
        raise SeedCountMismatch(f"found {len(crossings)} real crossings of phi^2 around {tp}, expected 6")
    vals = phi2(np.array(crossings)).real
    want = vals < 0 if kind == "stokes" else vals > 0
    picked = sorted(float(t % (2 * math.pi)) for t, keep in zip(crossings, want) if keep)
    if len(picked) != 3:
        raise SeedCountMismatch(f"{len(picked)} {kind} directions at {tp}, expected 3")
    return picked


def _direction(P: ComplexPolynomial, z: complex, p_prev: complex, kind: str) -> tuple[complex, complex]:
    val = P(z)
    p = cmath.sqrt(val)
    if abs(2 * p) < 1e-12:
        raise BranchAmbiguity(f"square-root branches coincide at z={z}")
    if abs(p - p_prev) > abs(p + p_prev):
        p = -p
    u = 1j / p if kind == "stokes" else 1 / p
    return u / abs(u), p


def trace_curve(P: ComplexPolynomial, tp: complex, kind: str, seed_angle: float, step: float,
                max_arc: float, domain: Rectangle, others=(), origin: str = "tp",
                branch_index: int = 0) -> StokesCurve:
    """Unit-speed RK4 trace of one Stokes or anti-Stokes curve leaving ``tp``."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    r0 = 10 * step
    out_dir = cmath.exp(1j * seed_angle)
    z = tp + r0 * out_dir
    p = cmath.sqrt(P(z))
    u = 1j / p if kind == "stokes" else 1 / p
    # orient the branch so the curve initially moves away from tp
    if (u * out_dir.conjugate()).real < 0:
        p = -p
    pts = [z]
    ps = [p]
    s = r0
    stop = 5 * step
    while s < max_arc:
        k1, p1 = _direction(P, z, p, kind)
        k2, _ = _direction(P, z + 0.5 * step * k1, p1, kind)
        k3, _ = _direction(P, z + 0.5 * step * k2, p1, kind)
        k4, _ = _direction(P, z + step * k3, p1, kind)
        z = z + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _, p = _direction(P, z, p1, kind)
        s += step
        pts.append(z)
        ps.append(p)
        if not domain.contains(z):
            break
        if any(abs(z - o) < stop for o in others):
            break
    points = np.array(pts)
    arc = r0 + step * np.arange(len(points))
    drift = _phase_drift(P, points, np.array(ps), kind)
    return StokesCurve(origin, kind, branch_index, points, drift, arc, float(seed_angle))


def _phase_drift(P: ComplexPolynomial, points: np.ndarray, ps: np.ndarray, kind: str) -> float:
    """max_k |Re (phi(z_k) - phi(z_0))| (Im for anti-Stokes), 3-point Gauss per segment."""
    if len(points) < 2:
        return 0.0
    a, b = points[:-1], points[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL3_X[None, :]
    raw = np.sqrt(P(nodes.ravel()).reshape(nodes.shape))
    # pick the root closest to the branch carried at the segment start
    ref = ps[:-1, None]
    roots = np.where(np.abs(raw - ref) <= np.abs(raw + ref), raw, -raw)
    incr = half * (roots @ _GL3_W)
    phi = np.concatenate([[0], np.cumsum(incr)])
    part = phi.real if kind == "stokes" else phi.imag
    return float(np.max(np.abs(part)))


def seed_angles(pot: PerturbedPotential, E: complex, eps: float, tp: complex, kind: str,
                r0: float = 1e-2) -> list[float]:
    return seed_angles_poly(pot.shifted(E, eps), complex(tp), kind, r0)


def trace_stokes(pot: PerturbedPotential, E: complex, eps: float, tp: complex, kind: str,
                 seed_angle: float, step: float, max_arc: float, domain: Rectangle,
                 origin: str = "tp", branch_index: int = 0) -> StokesCurve:
    """Trace one curve of V_eps - E from turning point ``tp``."""
    if step > 1e-2 * 2 * max(domain.half_width, domain.half_height):
        raise ValueError("step must be at most 1e-2 of the domain size")
    P = pot.shifted(E, eps)
    others = [r for r in poly_roots(P) if abs(r - tp) > 1e-8]
    return trace_curve(P, complex(tp), kind, seed_angle, step, max_arc, domain, others, origin, branch_index)


def trace_family(pot: PerturbedPotential, E: complex, eps: float, ref: WellStructure,
                 domain: Rectangle, step: float | None = None, max_arc: float | None = None,
                 kinds=KINDS) -> list[StokesCurve]:
    """All three curves of each kind from each of the four labelled turning points."""
    scale = 2 * max(domain.half_width, domain.half_height)
    step = 1e-3 * scale if step is None else step
    max_arc = 2 * scale if max_arc is None else max_arc
    tps = turning_points(pot, E, eps, ref)
    P = pot.shifted(E, eps)
    roots = poly_roots(P)
    curves = []
    for label, tp in zip(LABELS, tps.points):
        others = [r for r in roots if abs(r - tp) > 1e-8]
        for kind in kinds:
            for k, angle in enumerate(seed_angles_poly(P, tp, kind, 10 * step)):
                curves.append(trace_curve(P, tp, kind, angle, step, max_arc, domain, others, label, k))
    return curves
