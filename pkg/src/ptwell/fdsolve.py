"""Finite-difference eigenvalues of -h^2 d^2/dx^2 + V_eps on [-L, L] with Dirichlet ends.

The operator is the complex tridiagonal matrix of the 3-point Laplacian.
Eigenvalues near a shift come from shift-invert Arnoldi with full
reorthogonalization; converged eigenvectors are locked and projected out so
exactly degenerate doublets are recovered one vector at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import NotConverged, SingularShift
from .numerics import ComplexPolynomial, Rectangle, poly_roots
from .potential import PerturbedPotential

_EPS = np.finfo(float).eps
START_SEED = 20240611
STALL_CYCLES = 3


@dataclass(frozen=True)
class Grid:
    """Uniform grid of N subintervals on [-L, L]; only interior points carry unknowns."""

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.N < 2 or self.N % 2:
            raise ValueError("N must be an even integer >= 2")

    @property
    def delta(self) -> float:
        return 2 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.delta * np.arange(1, self.N)

    def refined(self) -> Grid:
        return Grid(self.L, 2 * self.N)


def default_half_width(pot: PerturbedPotential, E_max: float, factor: float = 1.5) -> float:
    """factor times the outermost real turning point of V0 at E_max."""
    c = pot.v0_coeffs.astype(complex)
    c[0] -= E_max
    roots = [r.real for r in poly_roots(ComplexPolynomial(c)) if abs(r.imag) < 1e-9 * max(1.0, abs(r))]
    if not roots:
        raise ValueError(f"V0 has no real turning point at E={E_max}")
    return factor * max(abs(r) for r in roots)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Complex symmetric tridiagonal matrix: diag on the diagonal, the constant off beside it."""

    diag: np.ndarray
    off: float
    h: float = 1.0
    eps: float = 0.0
    grid: Grid | None = None

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=complex).copy()
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @classmethod
    def from_values(cls, diag, off: float, grid: Grid | None = None, h: float = 1.0, eps: float = 0.0):
        return cls(diag, float(off), h, eps, grid)

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def opnorm(self) -> float:
        """max|diag| + 2|off|, an upper bound on the operator norm."""
        return float(np.max(np.abs(self.diag)) + 2 * abs(self.off))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        out[1:] += self.off * v[:-1]
        out[:-1] += self.off * v[1:]
        return out

    def dense(self) -> np.ndarray:
        n = self.size
        return np.diag(self.diag) + self.off * (np.eye(n, k=1) + np.eye(n, k=-1))

    def factor(self, sigma: complex) -> ShiftedLU:
        return ShiftedLU(self, complex(sigma))


def assemble(pot: PerturbedPotential | None, grid: Grid, h: float, eps: float) -> TridiagonalOperator:
    """Diagonal h^2 2/D^2 + V_eps(x_j), off-diagonal -h^2/D^2; pot=None means V = 0."""
    scale = h * h / grid.delta ** 2
    V = np.zeros(grid.N - 1, dtype=complex) if pot is None else pot.eval_V(grid.x, eps)
    return TridiagonalOperator(2 * scale + V, -scale, h, eps, grid)


def laplacian_eigenvalues(grid: Grid, h: float) -> np.ndarray:
    """Closed-form spectrum (h^2/D^2)(2 - 2cos(k pi/N)), k = 1..N-1, of the V = 0 operator."""
    k = np.arange(1, grid.N)
    return h * h / grid.delta ** 2 * (2 - 2 * np.cos(k * np.pi / grid.N))


class ShiftedLU:
    """LU factors of A - sigma with partial pivoting (LAPACK gttrf)."""

    def __init__(self, opr: TridiagonalOperator, sigma: complex):
        self.opr = opr
        self.sigma = sigma
        n = opr.size
        offs = np.full(n - 1, opr.off, dtype=complex)
        dl, d, du, du2, ipiv, info = lapack.zgttrf(offs, opr.diag - sigma, offs.copy())
        floor = max(1e-300, 16 * _EPS * opr.opnorm)
        if info > 0 or np.min(np.abs(d)) <= floor:
            raise SingularShift(f"pivot below {floor:.3e} for sigma={sigma}: shift is an eigenvalue to working precision")
        self._factors = (dl, d, du, du2, ipiv)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=complex)
        x, info = lapack.zgttrs(*self._factors, b.reshape(len(b), -1))
        if info != 0:
            raise SingularShift(f"gttrs failed with info={info}")
        return x.reshape(b.shape)


def lu_solve(opr: TridiagonalOperator, sigma: complex, rhs: np.ndarray) -> np.ndarray:
    """Solve (A - sigma) x = rhs."""
    return ShiftedLU(opr, sigma).solve(rhs)


@dataclass
class EigenpairSet:
    pairs: list[tuple[complex, float]]
    target: complex
    grid: Grid | None
    converged: bool = True
    incomplete: bool = False
    vectors: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.pairs], dtype=complex)

    def __len__(self) -> int:
        return len(self.pairs)


def _coeffs(B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """B^H w without materializing conj(B)."""
    return (w.conj() @ B).conj()


def _arnoldi(apply, v0: np.ndarray, k: int, Q: np.ndarray | None):
    """k steps of Arnoldi for (I - QQ*) apply, with two Gram-Schmidt passes per step."""
    n = len(v0)
    V = np.zeros((n, k + 1), dtype=complex)
    H = np.zeros((k + 1, k), dtype=complex)
    V[:, 0] = v0 / np.linalg.norm(v0)
    for j in range(k):
        w = apply(V[:, j])
        for _ in range(2):
            if Q is not None:
                w -= Q @ _coeffs(Q, w)
            c = _coeffs(V[:, : j + 1], w)
            w -= V[:, : j + 1] @ c
            H[: j + 1, j] += c
        beta = np.linalg.norm(w)
        H[j + 1, j] = beta
        if beta <= 1e-13 * np.linalg.norm(H[: j + 2, j]):
            return V[:, : j + 1], H[: j + 1, : j + 1]
        V[:, j + 1] = w / beta
    return V[:, :k], H[:k, :k]


def _inverse_step(opr: TridiagonalOperator, lam: complex, x: np.ndarray) -> tuple[np.ndarray, float]:
    """One solve with (A - lam); a near-singular factorization is what makes this step work."""
    n = opr.size
    offs = np.full(n - 1, opr.off, dtype=complex)
    dl, d, du, du2, ipiv, info = lapack.zgttrf(offs, opr.diag - lam, offs.copy())
    if info > 0:
        d[info - 1] = _EPS * opr.opnorm
    z, info = lapack.zgttrs(dl, d, du, du2, ipiv, x.reshape(n, 1))
    z = z.ravel()
    nz = np.linalg.norm(z)
    if info != 0 or not np.isfinite(nz) or nz == 0:
        return x, math.inf
    z /= nz
    return z, float(np.linalg.norm(opr.matvec(z) - lam * z))


def eigs_near(opr: TridiagonalOperator, sigma: complex, m: int = 6, tol: float = 1e-12,
              max_restart: int = 30, raise_on_failure: bool = False) -> EigenpairSet:
    """The m eigenvalues closest to sigma, each with residual <= tol * opnorm.

    Cycles continue until m pairs are accepted and one further cycle from a
    fresh start vector turns up nothing closer than the m-th.
    """
    if m > 40:
        raise ValueError("m must be at most 40")
    n = opr.size
    m = min(m, n)
    lu = opr.factor(sigma)
    apply = lu.solve
    norm = opr.opnorm
    k_dim = max(2 * m + 10, 30)
    rng = np.random.default_rng(START_SEED)

    lams: list[complex] = []
    ress: list[float] = []
    X: list[np.ndarray] = []
    Q = np.zeros((n, 0), dtype=complex)
    OpQ = np.zeros((n, 0), dtype=complex)
    start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    done = False
    idle = 0
    for _ in range(max_restart):
        p = Q.shape[1]
        k = min(k_dim, n - p)
        if k <= 0:
            done = len(lams) >= m
            break
        start = start - Q @ _coeffs(Q, start)
        if np.linalg.norm(start) < 1e-12:
            start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            start = start - Q @ _coeffs(Q, start)
        V, H = _arnoldi(apply, start, k, Q if p else None)
        theta, S = np.linalg.eig(H)
        keep = np.abs(theta) > 0
        theta, S = theta[keep], S[:, keep]
        order = np.argsort(-np.abs(theta))  # largest |theta| = closest to sigma
        theta, S = theta[order], S[:, order]

        dist_before = sorted(abs(l - sigma) for l in lams)
        mth_before = dist_before[m - 1] if len(dist_before) >= m else math.inf
        Q0 = Q
        T = Q0.conj().T @ OpQ if p else None
        improved = False
        pending = []
        for th, s in zip(theta[: m + 4], S[:, : m + 4].T):
            lam = sigma + 1 / th
            y = V @ s
            y /= np.linalg.norm(y)
            if p:
                # lift the deflated Ritz vector back to an eigenvector of the full operator
                rhs = _coeffs(Q0, apply(y))
                z = np.linalg.lstsq(th * np.eye(p) - T, rhs, rcond=None)[0]
                x = y + Q0 @ z
            else:
                x = y
            x /= np.linalg.norm(x)
            res = np.linalg.norm(opr.matvec(x) - lam * x)
            if res > tol * norm:
                # ill-conditioned eigenvalues stall above tol; one inverse-iteration step removes that floor
                x, res = _inverse_step(opr, lam, x)
            if res > tol * norm:
                pending.append(y)
                continue
            q = x - Q @ _coeffs(Q, x)
            if np.linalg.norm(q) < 1e-8:
                continue
            q = q - Q @ _coeffs(Q, q)
            q /= np.linalg.norm(q)
            Q = np.column_stack([Q, q])
            OpQ = np.column_stack([OpQ, apply(q)])
            lams.append(complex(lam))
            ress.append(float(res))
            X.append(x)
            if abs(lam - sigma) < mth_before:
                improved = True
        if len(dist_before) >= m and not improved:
            done = True
            break
        # Ritz values stuck in the pseudospectrum never reach tol; stop instead of cycling on
        idle = idle + 1 if len(lams) == len(dist_before) else 0
        if idle >= STALL_CYCLES:
            break
        start = np.sum(pending[:m], axis=0) if pending else rng.standard_normal(n) + 1j * rng.standard_normal(n)

    order = np.argsort([abs(l - sigma) for l in lams])[:m]
    out = EigenpairSet(
        [(lams[i], ress[i]) for i in order], complex(sigma), opr.grid,
        converged=done and len(order) >= m,
        vectors=np.array([X[i] for i in order]).T if len(order) else np.zeros((n, 0), dtype=complex),
    )
    if not out.converged and raise_on_failure:
        raise NotConverged(f"{len(out)} of {m} eigenpairs accepted near sigma={sigma}", partial=out)
    return out


def _dedupe(found: list[tuple[complex, float, np.ndarray]], tol: float):
    """Merge repeats of the same eigenpair; clusters of equal eigenvalues keep one entry per independent vector."""
    # single-linkage clusters of eigenvalues
    clusters: list[list] = []
    for item in found:
        linked = [c for c in clusters if any(abs(item[0] - o[0]) <= tol for o in c)]
        merged = [item]
        for c in linked:
            merged.extend(c)
            clusters.remove(c)
        clusters.append(merged)
    out = []
    for c in clusters:
        basis: list[np.ndarray] = []
        for lam, res, x in sorted(c, key=lambda t: t[1]):
            r = x / np.linalg.norm(x)
            for b in basis:
                r = r - b * np.vdot(b, r)
            rn = np.linalg.norm(r)
            if rn > 1e-6:
                basis.append(r / rn)
                out.append((lam, res, x))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def _same_multiset(a: list[complex], b: list[complex], tol: float) -> bool:
    if len(a) != len(b):
        return False
    rest = list(b)
    for lam in a:
        j = min(range(len(rest)), key=lambda j: abs(rest[j] - lam))
        if abs(rest[j] - lam) > tol:
            return False
        rest.pop(j)
    return True


def _shift_grid(window: Rectangle, sp: float, offset: float) -> list[complex]:
    re_lo, re_hi = window.re_bounds
    im_lo, im_hi = window.im_bounds
    xs = np.arange(re_lo + sp * (0.5 + offset), re_hi, sp)
    if im_hi - im_lo > sp:
        ys = np.arange(im_lo + sp * (0.5 + offset), im_hi, sp)
    else:
        ys = np.array([window.center.imag])
    return [complex(x, y) for y in ys for x in xs]


def _near_with_retry(opr, sigma, m, tol, max_restart):
    try:
        return eigs_near(opr, sigma, m, tol, max_restart)
    except SingularShift:
        return eigs_near(opr, sigma + 1e-8 * (1 + 1j), m, tol, max_restart)


def _sweep(opr, window, sp, offset, m, tol, max_restart):
    found = []
    converged = True
    for sigma in _shift_grid(window, sp, offset):
        res = _near_with_retry(opr, sigma, m, tol, max_restart)
        converged &= res.converged
        for (lam, r), x in zip(res.pairs, res.vectors.T):
            if window.contains(lam):
                found.append((lam, r, x))
    return _dedupe(found, 1e-8 * opr.opnorm), converged


def eigs_window(opr: TridiagonalOperator, window: Rectangle, tol: float = 1e-12, spacing: float | None = None,
                m: int = 8, max_restart: int = 30, check: bool = True) -> EigenpairSet:
    """All eigenvalues inside ``window`` from a grid of shifts.

    ``spacing`` is the expected level spacing (default: window width / 20);
    shifts sit half a spacing apart. With ``check`` the sweep is repeated with
    shifts moved by half their spacing and any disagreement sets ``incomplete``.
    """
    expected = spacing if spacing is not None else 2 * window.half_width / 20
    sp = 0.5 * expected
    first, conv = _sweep(opr, window, sp, 0.0, m, tol, max_restart)
    incomplete = not conv
    if check:
        second, conv2 = _sweep(opr, window, sp, 0.5, m, tol, max_restart)
        same = _same_multiset([t[0] for t in first], [t[0] for t in second], 1e-8 * opr.opnorm)
        incomplete = incomplete or not same or not conv2
    vecs = np.array([t[2] for t in first]).T if first else np.zeros((opr.size, 0), dtype=complex)
    return EigenpairSet([(t[0], t[1]) for t in first], window.center, opr.grid,
                        converged=not incomplete, incomplete=incomplete, vectors=vecs)


@dataclass(frozen=True)
class GridSelfTest:
    N: int
    drifts: tuple[float, ...]
    max_drift: float
    passed: bool
    coarse: tuple[complex, ...]
    fine: tuple[complex, ...]


def grid_selftest(pot: PerturbedPotential | None, h: float, eps: float, window: Rectangle,
                  L: float = 4.0, N: int = 1000, tol: float = 1e-12, threshold: float = 1e-6,
                  spacing: float | None = None) -> GridSelfTest:
    """Relative eigenvalue drift between grids with N and 2N subintervals; passes when <= threshold."""
    g1 = Grid(L, N)
    g2 = g1.refined()
    a = eigs_window(assemble(pot, g1, h, eps), window, tol, spacing, check=False).eigenvalues
    b = eigs_window(assemble(pot, g2, h, eps), window, tol, spacing, check=False).eigenvalues
    drifts = []
    if len(a) and len(b):
        used = set()
        for lam in a:
            j = min((j for j in range(len(b)) if j not in used), key=lambda j: abs(b[j] - lam), default=None)
            if j is None:
                break
            used.add(j)
            drifts.append(abs(lam - b[j]) / max(1.0, abs(b[j])))
    complete = len(a) == len(b) and len(drifts) == len(a)
    max_drift = max(drifts) if drifts else math.inf
    return GridSelfTest(N, tuple(drifts), max_drift, bool(complete and max_drift <= threshold), tuple(a), tuple(b))
