"""Labelled complex turning points alpha_l, beta_l, beta_r, alpha_r of V_eps(z) = E."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import LabelAmbiguity, PolydiscViolation, StepTooLarge
from .numerics import newton_refine, poly_roots
from .potential import PerturbedPotential, WellStructure

SEPARATION_FLOOR = 1e-6
LABELS = ("alpha_l", "beta_l", "beta_r", "alpha_r")


@dataclass(frozen=True)
class TurningPoints:
    alpha_l: complex
    beta_l: complex
    beta_r: complex
    alpha_r: complex
    E: complex
    eps: float
    residual: float

    @property
    def points(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha_l, self.beta_l, self.beta_r, self.alpha_r)

    def min_separation(self) -> float:
        return min(abs(a - b) for a, b in combinations(self.points, 2))

    def conj(self) -> TurningPoints:
        return TurningPoints(
            *(complex(z).conjugate() for z in self.points),
            E=complex(self.E).conjugate(), eps=-self.eps, residual=self.residual,
        )


def _reference_points(ref) -> tuple:
    return tuple(complex(z) for z in ref.points)


def turning_points(
    pot: PerturbedPotential,
    E: complex,
    eps: float,
    ref: WellStructure | TurningPoints,
    polydisc: tuple[float, float] | None = None,
) -> TurningPoints:
    """Roots of V_eps - E labelled by nearest-neighbour matching against ``ref``.

    ``polydisc=(rE, reps)`` optionally restricts (E, eps) to a neighbourhood of
    the reference energy of a WellStructure.
    """
    E = complex(E)
    if polydisc is not None and isinstance(ref, WellStructure):
        rE, reps = polydisc
        if abs(E - ref.E0) > rE or abs(eps) > reps:
            raise PolydiscViolation(f"(E, eps)=({E}, {eps}) outside polydisc ({rE}, {reps}) around E0={ref.E0}")
    p = pot.shifted(E, eps)
    dp = p.derivative()
    refs = _reference_points(ref)
    init = refs if p.degree == 4 and len(set(refs)) == 4 else None
    roots = np.array(poly_roots(p, init=init))

    idx = [int(np.argmin(np.abs(roots - r))) for r in refs]
    if len(set(idx)) != 4:
        raise LabelAmbiguity(f"nearest-neighbour labelling is not a bijection at E={E}, eps={eps}")
    labelled = roots[idx]
    for a, b in combinations(labelled, 2):
        if abs(a - b) < SEPARATION_FLOOR:
            raise LabelAmbiguity(f"turning points closer than {SEPARATION_FLOOR} at E={E}, eps={eps}")

    refined = []
    for z0 in labelled:
        tol = 1e-12 * p.scale(z0)
        z = newton_refine(p, dp, z0, tol)
        # one polishing step, kept only if it lowers the residual
        d = dp(z)
        if d != 0:
            z1 = z - p(z) / d
            if abs(p(z1)) < abs(p(z)):
                z = z1
        refined.append(complex(z))

    for a, b in combinations(refined, 2):
        if abs(a - b) < SEPARATION_FLOOR:
            raise LabelAmbiguity(f"turning points closer than {SEPARATION_FLOOR} at E={E}, eps={eps}")
    others = np.delete(roots, idx)
    for r in others:
        if min(abs(r - z) for z in refined) < SEPARATION_FLOOR:
            raise LabelAmbiguity("an unlabelled root collides with a turning point")

    residual = max(abs(p(z)) / p.scale(z) for z in refined)
    return TurningPoints(*refined, E=E, eps=float(eps), residual=float(residual))


def continue_path(
    pot: PerturbedPotential,
    path,
    ref: WellStructure | TurningPoints,
    max_bisections: int = 20,
) -> list[TurningPoints]:
    """Turning points along a sequence of (E, eps), each labelled from its predecessor.

    A step is subdivided until |dE| + |deps| <= 0.1 * (minimum pairwise distance).
    """
    out: list[TurningPoints] = []
    prev = ref
    if isinstance(ref, WellStructure):
        prev_E, prev_eps = complex(ref.E0), 0.0
        prev_sep = min(abs(a - b) for a, b in combinations(ref.points, 2))
    else:
        prev_E, prev_eps = complex(ref.E), ref.eps
        prev_sep = ref.min_separation()

    for E, eps in path:
        E = complex(E)
        pending = [(E, float(eps), 0)]
        budget = 64 * max_bisections
        while pending:
            budget -= 1
            if budget < 0:
                raise StepTooLarge(f"continuation to (E={E}, eps={eps}) did not settle")
            tE, teps, depth = pending[-1]
            if abs(tE - prev_E) + abs(teps - prev_eps) > 0.1 * prev_sep:
                if depth >= max_bisections:
                    raise StepTooLarge(f"step to (E={E}, eps={eps}) still too large after {max_bisections} bisections")
                pending.append((0.5 * (prev_E + tE), 0.5 * (prev_eps + teps), depth + 1))
                continue
            tp = turning_points(pot, tE, teps, prev)
            pending.pop()
            prev, prev_E, prev_eps, prev_sep = tp, tE, teps, tp.min_separation()
        out.append(prev)
    return out
