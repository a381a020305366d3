"""Sweeps over (h, eps), FD/WKB comparison, threshold measurement and file output."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .actions import ActionEvaluator
from .bifurcation import BifurcationModel, build_model
from .config import RunConfig
from .errors import MatchCardinalityMismatch, PairLost, PtwellError
from .fdsolve import Grid, TridiagonalOperator, assemble, default_half_width, eigs_near, eigs_window
from .numerics import Rectangle
from .potential import PerturbedPotential, WellStructure, classify_wells
from .quantization import SpectralParams, bs_levels, find_f_roots, gamma_slope, localization_radius
from .stokes import StokesCurve
from .svg import Panel, render_panels

log = logging.getLogger(__name__)

SPECTRUM_HEADER = ["method", "h", "epsilon", "re_lambda", "im_lambda", "residual", "config_hash"]
THRESHOLD_HEADER = ["E1", "h", "eps_c_model", "eps_star_fd", "ratio", "config_hash"]
STOKES_HEADER = ["curve_id", "origin", "kind", "k", "s", "re_z", "im_z"]
ERRORS_HEADER = ["h", "epsilon", "stage", "error", "config_hash"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- setup -------------------------------------------------------------------


def potential_of(cfg: RunConfig) -> PerturbedPotential:
    p = cfg.potential
    return PerturbedPotential(list(p.v0), list(p.w), p.pt_enforced)


def reference_of(cfg: RunConfig, pot: PerturbedPotential | None = None) -> WellStructure:
    return classify_wells(pot or potential_of(cfg), cfg.E0)


def evaluator_of(cfg: RunConfig, pot: PerturbedPotential, well: WellStructure) -> ActionEvaluator:
    polydisc = tuple(cfg.potential.polydisc) if cfg.potential.polydisc else None
    return ActionEvaluator(pot, well, cfg.quadrature.n_nodes, polydisc)


def cell_window(cfg: RunConfig, eps: float) -> Rectangle:
    w = cfg.window
    return Rectangle(complex(*w.center), w.half_width, w.half_height + w.im_growth * abs(eps))


def grid_of(cfg: RunConfig, pot: PerturbedPotential) -> Grid:
    L = cfg.grid.L
    if L == 0:
        top = cfg.window.center[0] + cfg.window.half_width
        L = default_half_width(pot, top, cfg.grid.L_factor)
    return Grid(L, cfg.grid.N)


def expected_spacing(cfg: RunConfig, h: float, ev: ActionEvaluator, well: WellStructure) -> float:
    """Configured spacing, else pi h / dI/dE at the window centre (clamped into the double-well range)."""
    if cfg.window.spacing > 0:
        return cfg.window.spacing
    lo = well.well_min_left + 0.05 * (well.barrier_top - well.well_min_left)
    hi = well.barrier_top - 0.05 * (well.barrier_top - well.well_min_left)
    E = min(max(cfg.window.center[0], lo), hi)
    return math.pi * h / ev.dI_dE("left", E, 0.0).real


# -- spectrum sweep ----------------------------------------------------------------


@dataclass
class CellResult:
    h: float
    eps: float
    pairs: list[tuple[complex, float]]
    incomplete: bool = False
    error: str | None = None


@dataclass
class SweepResult:
    cells: list[CellResult]
    config_hash: str
    grid: Grid | None = None

    def rows(self) -> list[tuple]:
        out = []
        for c in self.cells:
            out.extend(("fd", c.h, c.eps, lam.real, lam.imag, res) for lam, res in c.pairs)
        return sort_rows(out)


def sort_rows(rows: list[tuple]) -> list[tuple]:
    return sorted(rows, key=lambda r: (r[1], r[2], r[3], r[4], r[0]))


def operator_for(cfg: RunConfig, pot: PerturbedPotential, h: float, eps: float) -> TridiagonalOperator:
    return assemble(pot, grid_of(cfg, pot), h, eps)


def solve_cell(cfg: RunConfig, pot: PerturbedPotential, h: float, eps: float, spacing: float) -> CellResult:
    try:
        opr = operator_for(cfg, pot, h, eps)
        res = eigs_window(opr, cell_window(cfg, eps), cfg.solver.tol, spacing, cfg.solver.m, cfg.solver.max_restart)
        return CellResult(h, eps, res.pairs, res.incomplete)
    except PtwellError as exc:
        return CellResult(h, eps, [], True, f"{type(exc).__name__}: {exc}")


def run_sweep(cfg: RunConfig, out_dir: str | Path | None = None, threads: int = 1) -> SweepResult:
    """FD eigenvalues for every (h, eps) cell; writes spectrum.csv and errors.csv when out_dir is given."""
    pot = potential_of(cfg)
    well = reference_of(cfg, pot)
    ev = evaluator_of(cfg, pot, well)
    spacing = {h: expected_spacing(cfg, h, ev, well) for h in cfg.sweep.h}
    jobs = [(h, eps) for h in cfg.sweep.h for eps in cfg.sweep.eps]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda job: solve_cell(cfg, pot, job[0], job[1], spacing[job[0]]), jobs))
    else:
        cells = [solve_cell(cfg, pot, h, eps, spacing[h]) for h, eps in jobs]
    cells.sort(key=lambda c: (c.h, c.eps))
    result = SweepResult(cells, cfg.config_hash(), grid_of(cfg, pot))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_spectrum_csv(out / "spectrum.csv", result.rows(), result.config_hash)
        errors = []
        for c in cells:
            if c.error:
                errors.append((c.h, c.eps, "eigs_window", c.error))
            elif c.incomplete:
                errors.append((c.h, c.eps, "eigs_window", "Incomplete: shifted rerun disagreed"))
        write_errors_csv(out / "errors.csv", errors, result.config_hash)
    return result


def write_spectrum_csv(path: str | Path, rows: list[tuple], config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for method, h, eps, re, im, res in sort_rows(rows):
            w.writerow([method, fmt(h), fmt(eps), fmt(re), fmt(im), fmt(res), config_hash])


def read_spectrum_csv(path: str | Path) -> tuple[list[tuple], set[str]]:
    rows, hashes = [], set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SPECTRUM_HEADER:
            raise ValueError(f"unexpected spectrum.csv header {reader.fieldnames}")
        for r in reader:
            rows.append((r["method"], float(r["h"]), float(r["epsilon"]), float(r["re_lambda"]),
                         float(r["im_lambda"]), float(r["residual"])))
            hashes.add(r["config_hash"])
    return rows, hashes


def write_errors_csv(path: str | Path, errors: list[tuple], config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERRORS_HEADER)
        for h, eps, stage, msg in errors:
            w.writerow([fmt(h), fmt(eps), stage, msg, config_hash])


# -- WKB side ------------------------------------------------------------------------


@dataclass
class WkbCell:
    h: float
    eps: float
    roots: list
    levels: list
    certified: bool


def wkb_cell(cfg: RunConfig, h: float, eps: float, pot=None, well=None, ev=None,
             window: Rectangle | None = None) -> WkbCell:
    pot = pot or potential_of(cfg)
    well = well or reference_of(cfg, pot)
    ev = ev or evaluator_of(cfg, pot, well)
    window = window or cell_window(cfg, eps)
    params = SpectralParams(h, eps)
    roots = find_f_roots(pot, params, window, well, ev, strict=False)
    levels = bs_levels(pot, params, window, "left", well, ev) + bs_levels(pot, params, window, "right", well, ev)
    certified = all(r.certified for r in roots)
    return WkbCell(h, eps, roots, levels, certified)


def wkb_rows(cell: WkbCell) -> list[tuple]:
    rows = []
    for r in cell.roots:
        for _ in range(r.multiplicity):
            rows.append(("wkb", cell.h, cell.eps, r.E.real, r.E.imag, r.newton_residual))
    for lv in cell.levels:
        rows.append(("bs", cell.h, cell.eps, lv.E.real, lv.E.imag, lv.residual))
    return sort_rows(rows)


# -- comparison ----------------------------------------------------------------------


@dataclass
class CompareCell:
    h: float
    eps: float
    matched: list[tuple[complex, complex, float]]
    unmatched_fd: list[complex]
    unmatched_wkb: list[complex]
    max_delta: float
    contained: list[bool]
    disc_radii: list[float]
    cardinality_ok: bool
    certified: bool

    @property
    def all_contained(self) -> bool:
        return all(self.contained)


@dataclass
class CompareReport:
    cells: list[CompareCell] = field(default_factory=list)
    config_hash: str = ""

    def max_delta(self, h: float | None = None) -> float:
        vals = [c.max_delta for c in self.cells if h is None or c.h == h]
        return max(vals) if vals else math.nan


def greedy_match(a: list[complex], b: list[complex]) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Pairs (i, j) chosen in order of increasing |a_i - b_j|, each index used once."""
    cand = sorted(((abs(x - y), i, j) for i, x in enumerate(a) for j, y in enumerate(b)))
    ua, ub, pairs = set(), set(), []
    for _, i, j in cand:
        if i in ua or j in ub:
            continue
        pairs.append((i, j))
        ua.add(i)
        ub.add(j)
    return pairs, [i for i in range(len(a)) if i not in ua], [j for j in range(len(b)) if j not in ub]


def compare_cell(cfg: RunConfig, h: float, eps: float, fd: list[complex], wkb: WkbCell, ev: ActionEvaluator,
                 disc_factor: float = 1.0) -> CompareCell:
    wk = [r.E for r in wkb.roots for _ in range(r.multiplicity)]
    pairs, ufd, uwk = greedy_match(fd, wk)
    matched = [(fd[i], wk[j], abs(fd[i] - wk[j])) for i, j in pairs]
    if len(fd) != len(wk):
        log.warning("%s", MatchCardinalityMismatch(f"h={h} eps={eps}: {len(fd)} FD vs {len(wk)} WKB"))
    centres, radii = [], []
    for lv in wkb.levels:
        J = ev.J(lv.E, eps)
        r = disc_factor * localization_radius(lv.E, eps, h, J, cfg.localization.C)
        centres += [lv.E, lv.E.conjugate()]
        radii += [r, r]
    contained = [any(abs(z - c) <= r for c, r in zip(centres, radii)) for z in fd]
    max_delta = max((d for _, _, d in matched), default=math.nan)
    return CompareCell(h, eps, matched, [fd[i] for i in ufd], [wk[j] for j in uwk], max_delta,
                       contained, radii, len(fd) == len(wk), wkb.certified)


def compare_spectrum(cfg: RunConfig, threads: int = 1, disc_factor: float = 1.0,
                     sweep: SweepResult | None = None) -> CompareReport:
    """Nearest matching of FD eigenvalues against zeros of the quantization function, cell by cell."""
    if sweep is not None and sweep.config_hash != cfg.config_hash():
        raise ValueError("sweep was produced with a different configuration")
    sweep = sweep or run_sweep(cfg, threads=threads)
    pot = potential_of(cfg)
    well = reference_of(cfg, pot)
    ev = evaluator_of(cfg, pot, well)
    report = CompareReport(config_hash=cfg.config_hash())
    for cell in sweep.cells:
        wkb = wkb_cell(cfg, cell.h, cell.eps, pot, well, ev)
        fd = [lam for lam, _ in cell.pairs]
        report.cells.append(compare_cell(cfg, cell.h, cell.eps, fd, wkb, ev, disc_factor))
    return report


# -- empirical threshold ---------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    E1: float
    h: float
    eps_star: float
    eps_c_model: float
    splitting0: float
    pair0: tuple[complex, complex]

    @property
    def ratio(self) -> float:
        return self.eps_star / self.eps_c_model


def _pair_near(opr: TridiagonalOperator, sigma: complex, tol: float) -> tuple[complex, complex]:
    res = eigs_near(opr, sigma, m=4, tol=tol)
    lams = sorted(res.eigenvalues, key=lambda z: abs(z - sigma))
    if len(lams) < 2:
        raise PairLost(f"fewer than two eigenvalues found near {sigma}")
    # at the coalescence point the solver may return only the pair itself
    if len(lams) > 2 and abs(lams[1] - sigma) > 0.25 * abs(lams[2] - sigma):
        raise PairLost(f"no isolated pair near {sigma}: distances {[abs(z - sigma) for z in lams[:3]]}")
    return lams[0], lams[1]


def empirical_threshold(cfg: RunConfig, E1: float, h: float, model: BifurcationModel | None = None,
                        steps: int = 40, tol: float = 1e-13) -> ThresholdResult:
    """Smallest eps at which the FD doublet nearest E1 leaves the real axis, by bisection on [0, 10 eps_c]."""
    pot = potential_of(cfg)
    well = reference_of(cfg, pot)
    ev = evaluator_of(cfg, pot, well)
    model = model or build_model(pot, E1, h, well, evaluator=ev)
    grid = grid_of(cfg, pot)

    # the doublet nearest E1: the two closest eigenvalues to the model's level, then re-centred
    opr0 = assemble(pot, grid, h, 0.0)
    res0 = eigs_near(opr0, complex(E1), m=6, tol=tol)
    lams = sorted(res0.eigenvalues, key=lambda z: abs(z.real - E1))
    centre = complex(0.5 * (lams[0] + lams[1]).real)
    pair0 = _pair_near(opr0, centre, tol)
    centre = complex(0.5 * (pair0[0] + pair0[1]).real)
    split0 = abs(pair0[0] - pair0[1])
    floor = 1e-3 * (split0 + h * math.exp(-model.J_val / h))

    def broken(eps: float) -> bool:
        pair = _pair_near(assemble(pot, grid, h, eps), centre, tol)
        if max(abs(z - centre) for z in pair) > 10 * (split0 + 2 * abs(model.dIde_abs / model.dIdE) * eps):
            raise PairLost(f"tracked pair drifted away from {centre} at eps={eps}")
        return max(abs(z.imag) for z in pair) > floor

    lo, hi = 0.0, 10 * model.eps_c
    if not broken(hi):
        raise PairLost(f"pair still real at eps={hi}")
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if broken(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(float(E1), float(h), 0.5 * (lo + hi), model.eps_c, split0, pair0)


def fit_log_threshold(results: list[ThresholdResult]) -> float:
    """Slope of log eps* against 1/h."""
    x = np.array([1 / r.h for r in results])
    y = np.log([r.eps_star for r in results])
    return float(np.polyfit(x, y, 1)[0])


def write_threshold_csv(path: str | Path, results: list[ThresholdResult], config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(THRESHOLD_HEADER)
        for r in sorted(results, key=lambda r: (r.E1, r.h)):
            w.writerow([fmt(r.E1), fmt(r.h), fmt(r.eps_c_model), fmt(r.eps_star), fmt(r.ratio), config_hash])


# -- stokes output ----------------------------------------------------------------------


def write_stokes_csv(path: str | Path, curves: list[StokesCurve]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STOKES_HEADER)
        for cid, c in enumerate(curves):
            for s, z in zip(c.arc, c.points):
                w.writerow([cid, c.origin, c.kind, c.branch_index, fmt(s), fmt(z.real), fmt(z.imag)])


# -- Figure 1 ----------------------------------------------------------------------------


@dataclass
class FigureResult:
    sweep: SweepResult
    svg_path: Path | None
    csv_path: Path | None
    panels: list[Panel]


def figure_panels(sweep: SweepResult) -> list[Panel]:
    return [Panel(f"h={c.h:g}, eps={c.eps:g}", [lam for lam, _ in c.pairs]) for c in sweep.cells]


def figure1(cfg: RunConfig, out_dir: str | Path | None = None, threads: int = 1) -> FigureResult:
    """Sweep plus one scatter panel (Re lambda, Im lambda) per (h, eps) cell."""
    sweep = run_sweep(cfg, out_dir, threads)
    panels = figure_panels(sweep)
    svg_path = csv_path = None
    if out_dir is not None:
        out = Path(out_dir)
        csv_path = out / "spectrum.csv"
        if "svg" in cfg.output.formats:
            grid = sweep.grid
            meta = {"config_hash": sweep.config_hash, "L": grid.L if grid else "", "N": grid.N if grid else "",
                    "boundary": "dirichlet", "points": sum(len(p.points) for p in panels)}
            svg_path = out / "figure1.svg"
            svg_path.write_text(render_panels(panels, "Eigenvalues of -h^2 d^2/dx^2 + V0 + i eps W", 5, meta))
    return FigureResult(sweep, svg_path, csv_path, panels)


def slope_check(cfg: RunConfig, sweep: SweepResult, eps_values=(1e-4, 1e-3), re_range=(-0.6, -0.1),
                rel_tol: float = 0.15) -> list[tuple[float, complex, float, float, bool]]:
    """(eps, lambda, |Im lambda|/eps, |slope(Re lambda)|, ok) for the drift law at each eigenvalue in range."""
    pot = potential_of(cfg)
    well = reference_of(cfg, pot)
    ev = evaluator_of(cfg, pot, well)
    out = []
    for c in sweep.cells:
        if not any(math.isclose(c.eps, e, rel_tol=1e-12) for e in eps_values):
            continue
        for lam, _ in c.pairs:
            if not (re_range[0] < lam.real < re_range[1]):
                continue
            slope = abs(gamma_slope(pot, lam.real, well, ev))
            ratio = abs(lam.imag) / c.eps
            out.append((c.eps, lam, ratio, slope, abs(ratio - slope) <= rel_tol * slope))
    return out
