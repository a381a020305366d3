"""Numerical kernels: polynomial roots, damped Newton, Chebyshev rules,
argument-principle winding counts.

Everything here is pure; arrays held by the value types are never mutated
after construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import (
    BoundaryZeroSuspected,
    DegreeZero,
    DerivativeUnderflow,
    NoConvergence,
)

ComplexFn = Callable[[complex], complex]


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients in ascending degree order."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_rev", tuple(complex(a) for a in c[::-1]))

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> ComplexPolynomial:
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.concatenate([[0], c]) - r * np.concatenate([c, [0]])
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        if isinstance(z, (complex, float, int)):
            acc = 0j
            for a in self._rev:
                acc = acc * z + a
            return acc
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z) + self.coeffs[-1]
        for a in self.coeffs[-2::-1]:
            acc = acc * z + a
        return acc if acc.ndim else complex(acc)

    def derivative(self) -> ComplexPolynomial:
        if self.degree == 0:
            return ComplexPolynomial([0.0])
        return ComplexPolynomial(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def deflate(self, root: complex) -> ComplexPolynomial:
        """Quotient of p(z) / (z - root) by synthetic division (remainder dropped)."""
        c = self.coeffs
        q = np.empty(len(c) - 1, dtype=complex)
        acc = 0j
        for k in range(len(c) - 1, 0, -1):
            acc = acc * root + c[k]
            q[k - 1] = acc
        return ComplexPolynomial(q)

    def scale(self, z) -> float:
        """Residual scale max|coeff| * max(1, |z|)**deg used by root tolerances."""
        return float(np.max(np.abs(self.coeffs)) * max(1.0, abs(z)) ** self.degree)


def poly_roots(p: ComplexPolynomial, tol: float = 1e-12, max_iter: int = 200, init=None) -> list[complex]:
    """All roots of ``p`` by Aberth-Ehrlich simultaneous iteration.

    ``init`` optionally supplies distinct starting values (one per root), e.g.
    the roots of a nearby polynomial. Multiple roots come back as clusters of
    nearby entries.
    """
    n = p.degree
    if n < 1:
        raise DegreeZero("constant polynomial has no roots")
    c = p.coeffs
    # exact zero roots are split off so the starting circle has positive radius
    nzero = int(np.argmax(c != 0))
    if nzero:
        rest = poly_roots(ComplexPolynomial(c[nzero:]), tol, max_iter) if n > nzero else []
        return [0j] * nzero + rest

    if init is not None and len(init) == n:
        z = np.array(init, dtype=complex)
    else:
        z = _circle(abs(c[0] / c[-1]) ** (1.0 / n), n)
    try:
        return _aberth(p, z, tol, max_iter)
    except NoConvergence:
        # roots on widely separated scales: restart with one circle per scale
        return _aberth(p, _newton_polygon_start(c), tol, max_iter)


def _circle(radius: float, n: int, offset: float = 0.4) -> np.ndarray:
    return radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + offset))


def _newton_polygon_start(c: np.ndarray) -> np.ndarray:
    """Starting points on circles read off the upper convex hull of (k, log|c_k|)."""
    ks = [k for k in range(len(c)) if c[k] != 0]
    logs = {k: math.log(abs(c[k])) for k in ks}
    hull: list[int] = []
    for k in ks:
        # pop while the last hull vertex lies on or below the chord to k
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    parts = []
    for idx, (i, j) in enumerate(zip(hull, hull[1:])):
        radius = math.exp((logs[i] - logs[j]) / (j - i))
        parts.append(_circle(radius, j - i, 0.4 + 0.7 * idx))
    return np.concatenate(parts)


def _aberth(p: ComplexPolynomial, z: np.ndarray, tol: float, max_iter: int) -> list[complex]:
    c, n = p.coeffs, p.degree
    dp = p.derivative()
    # coincident or overflowing iterates give non-finite values; the checks below then reject the run
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_iter):
            pz = p(z)
            dpz = dp(z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            ratio = np.where(dpz != 0, pz / np.where(dpz != 0, dpz, 1), pz)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
            w = np.where(pz == 0, 0, w)
            z = z - w
            # relative to |z|: a tiny starting circle must not stop the iteration early
            if np.all(np.abs(w) <= 1e-3 * tol * np.abs(z)):
                break
            if not np.all(np.isfinite(z)):
                break
        res = np.abs(p(z))
    if not np.all(np.isfinite(res)):
        raise NoConvergence("Aberth iteration produced non-finite iterates")
    scales = np.max(np.abs(c)) * np.maximum(1.0, np.abs(z)) ** n
    if not np.all(res <= tol * scales):
        raise NoConvergence(f"Aberth iteration left residual {np.max(res / scales):.3e} (scaled)")
    # the scaled residual is lenient near the origin; the backward error catches roots stuck there
    backward = res / np.maximum(ComplexPolynomial(np.abs(c))(np.abs(z)).real, np.finfo(float).tiny)
    if not np.all(backward <= max(tol, 64 * n * np.finfo(float).eps)):
        raise NoConvergence(f"Aberth iteration left backward error {np.max(backward):.3e}")
    return [complex(r) for r in z]


def newton_refine(
    f: ComplexFn,
    df: ComplexFn,
    seed: complex,
    tol: float,
    max_iter: int = 100,
    xtol: float | None = None,
) -> complex:
    """Damped Newton iteration for an analytic function.

    Stops when ``|f(z)| <= tol`` (or, if ``xtol`` is given, when the accepted
    step is shorter than ``xtol``). The step is halved up to 40 times while
    ``|f|`` fails to decrease.
    """
    z = complex(seed)
    fz = f(z)
    for _ in range(max_iter):
        dfz = df(z)
        if abs(dfz) < 1e-300:
            raise DerivativeUnderflow(f"|f'| underflow at z={z}")
        if abs(fz) <= tol:
            return z
        step = fz / dfz
        for _ in range(41):
            znew = z - step
            fnew = f(znew)
            if abs(fnew) < abs(fz):
                break
            step *= 0.5
        else:
            if abs(fz) <= tol:
                return z
            raise NoConvergence(f"damping failed to reduce |f|={abs(fz):.3e} at z={z}")
        z, fz = znew, fnew
        if xtol is not None and abs(step) <= xtol:
            return z
    if abs(fz) <= tol:
        return z
    raise NoConvergence(f"Newton did not reach |f|<={tol:.3e} in {max_iter} iterations (|f|={abs(fz):.3e})")


@dataclass(frozen=True)
class QuadratureRule:
    kind: Literal["chebyshev-first", "chebyshev-second"]
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> complex:
        return complex(np.dot(self.weights, values))


def chebyshev_rule(kind: str, n: int) -> QuadratureRule:
    """Gauss-Chebyshev rule on (-1, 1), nodes increasing.

    ``first``: weight 1/sqrt(1-s^2); ``second``: weight sqrt(1-s^2).
    Both integrate polynomials of degree <= 2n-1 exactly against their weight.
    """
    if n < 1:
        raise ValueError("need at least one node")
    j = np.arange(1, n + 1)
    if kind in ("first", "chebyshev-first"):
        nodes = np.cos((2 * j - 1) * np.pi / (2 * n))
        weights = np.full(n, np.pi / n)
        kind = "chebyshev-first"
    elif kind in ("second", "chebyshev-second"):
        theta = j * np.pi / (n + 1)
        nodes = np.cos(theta)
        weights = np.pi / (n + 1) * np.sin(theta) ** 2
        kind = "chebyshev-second"
    else:
        raise ValueError(f"unknown Chebyshev kind {kind!r}")
    nodes, weights = nodes[::-1].copy(), weights[::-1].copy()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(kind, nodes, weights)


@dataclass(frozen=True)
class Rectangle:
    center: complex
    half_width: float
    half_height: float

    def __post_init__(self):
        if not (self.half_width > 0 and self.half_height > 0):
            raise ValueError("rectangle half sizes must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def from_bounds(cls, re_lo, re_hi, im_lo, im_hi) -> Rectangle:
        return cls(complex((re_lo + re_hi) / 2, (im_lo + im_hi) / 2), (re_hi - re_lo) / 2, (im_hi - im_lo) / 2)

    @property
    def re_bounds(self) -> tuple[float, float]:
        return self.center.real - self.half_width, self.center.real + self.half_width

    @property
    def im_bounds(self) -> tuple[float, float]:
        return self.center.imag - self.half_height, self.center.imag + self.half_height

    def contains(self, z: complex) -> bool:
        return abs(z.real - self.center.real) < self.half_width and abs(z.imag - self.center.imag) < self.half_height

    def corners(self) -> list[complex]:
        """Counter-clockwise from the lower-left corner."""
        c, w, hh = self.center, self.half_width, self.half_height
        return [c + complex(-w, -hh), c + complex(w, -hh), c + complex(w, hh), c + complex(-w, hh)]

    def inflate(self, factor: float) -> Rectangle:
        return Rectangle(self.center, self.half_width * factor, self.half_height * factor)


def winding_count(f: ComplexFn, box: Rectangle, samples_per_side: int = 64, max_depth: int = 40) -> int:
    """Number of zeros of ``f`` inside ``box`` from the argument increment on its boundary.

    A segment is accepted when its phase step is below pi/2 and f is close to
    linear on it (midpoint within a quarter of the smaller end value of the
    chord); otherwise it is bisected. Zeros near the boundary make f strongly
    curved, so segments shrink below their distance to the contour.
    """
    if samples_per_side < 64:
        raise ValueError("samples_per_side must be >= 64")
    corners = box.corners()
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        t = np.arange(samples_per_side) / samples_per_side
        pts.extend(a + (b - a) * t)
    pts.append(corners[0])
    vals = [f(z) for z in pts]
    mags = np.abs(vals)
    floor = 1e-13 * float(np.median(mags))
    if np.min(mags) < floor or np.min(mags) == 0:
        raise BoundaryZeroSuspected(f"|f| = {np.min(mags):.3e} on the boundary")

    def segment(z0, f0, z1, f1, depth):
        zm = 0.5 * (z0 + z1)
        fm = f(zm)
        if abs(fm) < floor or fm == 0:
            raise BoundaryZeroSuspected(f"|f| = {abs(fm):.3e} on the boundary near {zm}")
        d = cmath.phase(f1 / f0)
        if abs(d) < math.pi / 2 and abs(fm - 0.5 * (f0 + f1)) <= 0.25 * min(abs(f0), abs(f1)):
            return cmath.phase(fm / f0) + cmath.phase(f1 / fm)
        if depth >= max_depth:
            raise BoundaryZeroSuspected(f"phase jump not resolved near {z0}")
        return segment(z0, f0, zm, fm, depth + 1) + segment(zm, fm, z1, f1, depth + 1)

    total = sum(segment(pts[k], vals[k], pts[k + 1], vals[k + 1], 0) for k in range(len(pts) - 1))
    return int(round(total / (2 * math.pi)))
