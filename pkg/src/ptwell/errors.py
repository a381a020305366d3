"""Exception hierarchy shared by all ptwell modules."""

from __future__ import annotations


class PtwellError(Exception):
    """Base class for numerical failures raised by ptwell."""


class ConfigError(PtwellError):
    pass


# numerics
class NoConvergence(PtwellError):
    pass


class DegreeZero(PtwellError, ValueError):
    pass


class DerivativeUnderflow(PtwellError):
    pass


class BoundaryZeroSuspected(PtwellError):
    pass


# potential
class NotDoubleWell(PtwellError):
    pass


class NearDegenerateTurningPoint(PtwellError):
    pass


# turning points
class LabelAmbiguity(PtwellError):
    pass


class StepTooLarge(PtwellError):
    pass


class PolydiscViolation(PtwellError):
    pass


# actions
class BranchJump(PtwellError):
    pass


# quantization
class CertificationMismatch(PtwellError):
    """Winding count over a window disagrees with the roots found by Newton."""

    def __init__(self, winding: int, found: int, roots=None):
        super().__init__(f"winding count {winding} != {found} roots found (with multiplicity)")
        self.winding = winding
        self.found = found
        self.roots = roots or []


# bifurcation
class A7Violation(PtwellError):
    pass


# stokes
class BranchAmbiguity(PtwellError):
    pass


class SeedCountMismatch(PtwellError):
    pass


# fdsolve
class SingularShift(PtwellError):
    pass


class NotConverged(PtwellError):
    """Fewer eigenpairs than requested passed the residual test; ``partial`` holds the accepted ones."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


# harness
class PairLost(PtwellError):
    pass


class MatchCardinalityMismatch(PtwellError):
    pass
