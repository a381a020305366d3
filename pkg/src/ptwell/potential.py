"""Real polynomial double-well potentials V0 and their perturbation V0 + i*eps*W."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearDegenerateTurningPoint, NotDoubleWell
from .numerics import ComplexPolynomial, poly_roots

_REAL_IMAG_TOL = 1e-10
_SIMPLE_TP_TOL = 1e-8


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.nonzero(c)[0]
    c = c[: nz[-1] + 1] if nz.size else c[:1]
    c = c.copy()
    c.setflags(write=False)
    return c


@dataclass(frozen=True)
class PerturbedPotential:
    """V_eps(x) = V0(x) + i*eps*W(x) with ascending real coefficient arrays."""

    v0_coeffs: np.ndarray
    w_coeffs: np.ndarray
    pt_enforced: bool = True

    def __post_init__(self):
        v0, w = _trim(self.v0_coeffs), _trim(self.w_coeffs)
        object.__setattr__(self, "v0_coeffs", v0)
        object.__setattr__(self, "w_coeffs", w)
        if len(v0) - 1 < 4 or v0[-1] <= 0:
            raise ValueError("V0 must have degree >= 4 and a positive leading coefficient")
        if np.any(w != 0) and len(w) >= len(v0):
            raise ValueError("deg W must be smaller than deg V0")
        if self.pt_enforced and not pt_check(self):
            raise ValueError("PT symmetry requires V0 even and W odd")

    @classmethod
    def quartic(cls) -> PerturbedPotential:
        """0.05 x^4 - 0.5 x^2 + i eps x, the standard example."""
        return cls([0.0, 0.0, -0.5, 0.0, 0.05], [0.0, 1.0], True)

    def with_w(self, w_coeffs, pt_enforced: bool | None = None) -> PerturbedPotential:
        pt = self.pt_enforced if pt_enforced is None else pt_enforced
        return PerturbedPotential(self.v0_coeffs, w_coeffs, pt)

    def eval_V0(self, z):
        return np.polynomial.polynomial.polyval(z, self.v0_coeffs)

    def eval_W(self, z):
        return np.polynomial.polynomial.polyval(z, self.w_coeffs)

    def eval_V(self, z, eps: float):
        """V0(z) + i*eps*W(z) (Horner)."""
        return self.eval_V0(z) + 1j * eps * self.eval_W(z)

    def eval_dV(self, z, eps: float):
        dv0 = np.polynomial.polynomial.polyder(self.v0_coeffs)
        dw = np.polynomial.polynomial.polyder(self.w_coeffs)
        return np.polynomial.polynomial.polyval(z, dv0) + 1j * eps * np.polynomial.polynomial.polyval(z, dw)

    def shifted(self, E: complex, eps: float) -> ComplexPolynomial:
        """V_eps - E as a complex polynomial."""
        c = self.v0_coeffs.astype(complex)
        w = np.zeros(len(c), dtype=complex)
        w[: len(self.w_coeffs)] = self.w_coeffs
        c = c + 1j * eps * w
        c[0] -= E
        return ComplexPolynomial(c)


@dataclass(frozen=True)
class WellStructure:
    E0: float
    alpha_l: float
    beta_l: float
    beta_r: float
    alpha_r: float
    barrier_top: float
    barrier_x: float
    well_min_left: float
    well_min_right: float

    @property
    def points(self) -> tuple[float, float, float, float]:
        return (self.alpha_l, self.beta_l, self.beta_r, self.alpha_r)


def _real_roots(coeffs) -> list[float]:
    roots = poly_roots(ComplexPolynomial(coeffs))
    return sorted(r.real for r in roots if abs(r.imag) < _REAL_IMAG_TOL * max(1.0, abs(r)))


def classify_wells(pot: PerturbedPotential, E0: float) -> WellStructure:
    """Locate the four real turning points of V0 at energy E0 and check their sign pattern."""
    c = pot.v0_coeffs.copy()
    c[0] -= E0
    xs = _real_roots(c)
    if len(xs) != 4:
        raise NotDoubleWell(f"V0 = {E0} has {len(xs)} real solutions, need 4")
    dv = pot.eval_dV(np.array(xs), 0.0).real
    if np.any(np.abs(dv) <= _SIMPLE_TP_TOL):
        raise NearDegenerateTurningPoint(f"|V0'| <= {_SIMPLE_TP_TOL} at a turning point (E0={E0})")
    if not (dv[0] < 0 < dv[1] and dv[2] < 0 < dv[3]):
        raise NotDoubleWell("turning points do not have the double-well sign pattern")

    crit = _real_roots(np.polynomial.polynomial.polyder(pot.v0_coeffs))
    v0 = pot.eval_V0

    def extremum(lo, hi, pick):
        inside = [x for x in crit if lo < x < hi]
        if not inside:
            raise NotDoubleWell("no critical point of V0 between turning points")
        return pick(inside, key=lambda x: v0(x))

    xb = extremum(xs[1], xs[2], max)
    xl = extremum(xs[0], xs[1], min)
    xr = extremum(xs[2], xs[3], min)
    well = WellStructure(
        float(E0), *map(float, xs), float(v0(xb)), float(xb), float(v0(xl)), float(v0(xr))
    )
    if not (max(well.well_min_left, well.well_min_right) < E0 < well.barrier_top):
        raise NotDoubleWell("E0 is not between the well minima and the barrier top")
    return well


def pt_check(pot: PerturbedPotential) -> bool:
    """True iff V0 is even and W is odd, coefficient-wise and exactly."""
    return bool(np.all(pot.v0_coeffs[1::2] == 0) and np.all(pot.w_coeffs[0::2] == 0))


def a7_check(pot: PerturbedPotential, well: WellStructure, n: int = 128) -> float:
    """Integral of W (E0 - V0)^(-1/2) over the left well.

    A value with magnitude below 1e-10 means the non-degeneracy condition on W fails.
    """
    from .actions import real_well_integral

    return real_well_integral(pot, well.E0, well.alpha_l, well.beta_l, pot.eval_W, n)
