"""Command-line entry point: ptwell <subcommand> [options]."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .bifurcation import build_model, classify, predicted_pair
from .config import RunConfig, figure1_config, load_config
from .errors import ConfigError, PtwellError
from .numerics import Rectangle
from . import harness as H
from .stokes import CONVENTION, trace_family
from .svg import Panel, render_panels
from .turning import turning_points

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STRICT = 0, 2, 3, 4


def _complex_arg(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}") from exc
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    return complex(parts[0], parts[1])


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig().validate()


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _setup(cfg: RunConfig):
    pot = H.potential_of(cfg)
    well = H.reference_of(cfg, pot)
    return pot, well, H.evaluator_of(cfg, pot, well)


# -- subcommands -------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    res = H.run_sweep(cfg, out, args.threads)
    bad = sum(1 for c in res.cells if c.error or c.incomplete)
    print(f"{sum(len(c.pairs) for c in res.cells)} eigenvalues in {len(res.cells)} cells -> {out / 'spectrum.csv'}")
    if bad:
        print(f"{bad} cell(s) failed or incomplete, see {out / 'errors.csv'}")
    return EXIT_STRICT if args.strict and bad else EXIT_OK


def cmd_wkb_roots(args) -> int:
    cfg = _config(args)
    pot, well, ev = _setup(cfg)
    cell = H.wkb_cell(cfg, args.h, args.eps, pot, well, ev)
    rows = H.wkb_rows(cell)
    w = sys.stdout
    w.write(",".join(H.SPECTRUM_HEADER) + "\n")
    for method, h, eps, re, im, res in rows:
        w.write(",".join([method, H.fmt(h), H.fmt(eps), H.fmt(re), H.fmt(im), H.fmt(res), cfg.config_hash()]) + "\n")
    if not cell.certified:
        logging.warning("winding count over the window disagrees with the roots found")
        return EXIT_STRICT if args.strict else EXIT_OK
    return EXIT_OK


def cmd_actions(args) -> int:
    cfg = _config(args)
    _, _, ev = _setup(cfg)
    acts = ev.action_set(args.E, args.eps)
    data = acts.as_flat_dict()
    if args.h is not None:
        data["h"] = args.h
    print(json.dumps(data, indent=2))
    return EXIT_OK


def cmd_bifurcation(args) -> int:
    cfg = _config(args)
    pot, well, ev = _setup(cfg)
    model = build_model(pot, args.E1, args.h, well, args.kappa_tilde, ev)
    table = []
    for eps in args.eps or []:
        et = eps / args.h
        lo, hi = predicted_pair(et, model)
        table.append({"eps": eps, "eps_tilde": et, "kind": classify(et, model).value,
                      "E_lo": [lo.real, lo.imag], "E_hi": [hi.real, hi.imag]})
    print(json.dumps({"model": asdict(model), "classification": table}, indent=2))
    return EXIT_OK


def cmd_stokes(args) -> int:
    cfg = _config(args)
    pot, well, _ = _setup(cfg)
    out = _out_dir(args, cfg)
    span = 2.0 * max(abs(well.alpha_l), abs(well.alpha_r))
    domain = Rectangle(0j, span, span)
    curves = trace_family(pot, args.E, args.eps, well, domain, args.step)
    H.write_stokes_csv(out / "stokes.csv", curves)
    print(f"{len(curves)} curves ({CONVENTION}) -> {out / 'stokes.csv'}")
    if args.svg:
        tps = list(turning_points(pot, args.E, args.eps, well).points)
        panels = [Panel(kind, [], [list(c.points) for c in curves if c.kind == kind], tps)
                  for kind in ("stokes", "anti-stokes")]
        meta = {"convention": CONVENTION, "E": f"{args.E}", "eps": args.eps, "config_hash": cfg.config_hash()}
        (out / "stokes.svg").write_text(render_panels(panels, "Stokes geometry", 2, meta))
        print(f"-> {out / 'stokes.svg'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    sweep = H.run_sweep(cfg, out, args.threads)
    report = H.compare_spectrum(cfg, args.threads, sweep=sweep)
    ok = True
    for c in report.cells:
        contained = sum(c.contained)
        line = (f"h={c.h:g} eps={c.eps:g}: matched={len(c.matched)} max|d|={c.max_delta:.3e} "
                f"({c.max_delta / c.h:.3e} h) in-disc={contained}/{len(c.contained)} "
                f"cardinality={'ok' if c.cardinality_ok else 'MISMATCH'} certified={c.certified}")
        print(line)
        ok = ok and c.cardinality_ok and c.all_contained and c.max_delta <= 0.05 * c.h
    return EXIT_STRICT if args.strict and not ok else EXIT_OK


def cmd_threshold(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    hs = args.h or list(cfg.sweep.h)
    results = [H.empirical_threshold(cfg, args.E1, h) for h in hs]
    H.write_threshold_csv(out / "threshold.csv", results, cfg.config_hash())
    ok = True
    for r in results:
        print(f"E1={r.E1:g} h={r.h:g}: eps*={r.eps_star:.6e} eps_c={r.eps_c_model:.6e} ratio={r.ratio:.4f}")
        ok = ok and 0.7 <= r.ratio <= 1.3
    if len(results) >= 2:
        print(f"slope of log eps* vs 1/h: {H.fit_log_threshold(results):.4f}")
    print(f"-> {out / 'threshold.csv'}")
    return EXIT_STRICT if args.strict and not ok else EXIT_OK


def cmd_figure1(args) -> int:
    cfg = load_config(args.config) if args.config else figure1_config()
    out = _out_dir(args, cfg)
    res = H.figure1(cfg, out, args.threads)
    print(f"{len(res.panels)} panels, {sum(len(p.points) for p in res.panels)} points -> {res.svg_path} {res.csv_path}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress) -> None:
    def d(value):
        return suppress if suppress is not None else value

    p.add_argument("--config", default=d(None), help="TOML run configuration")
    p.add_argument("--out-dir", default=d(None), help="output directory (default: output.directory from the config)")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for sweep cells")
    p.add_argument("--strict", action="store_true", default=d(False),
                   help="exit 4 when a comparison or acceptance check fails")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptwell", description="Spectra of PT-symmetric perturbed double wells.")
    _global_flags(p, None)
    # global flags are accepted after the subcommand too; SUPPRESS keeps values given before it
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="finite-difference eigenvalues -> spectrum.csv")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("wkb-roots", parents=[common], help="zeros of the quantization function as CSV rows")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.set_defaults(func=cmd_wkb_roots)

    s = sub.add_parser("actions", parents=[common], help="action integrals and derivatives as JSON")
    s.add_argument("--E", type=_complex_arg, required=True, help="energy as re,im")
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--h", type=float, default=None)
    s.set_defaults(func=cmd_actions)

    s = sub.add_parser("bifurcation", parents=[common], help="threshold model as JSON")
    s.add_argument("--E1", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--eps", type=_float_list, default=None, help="comma-separated eps values to classify")
    s.add_argument("--kappa-tilde", type=float, default=None)
    s.set_defaults(func=cmd_bifurcation)

    s = sub.add_parser("stokes", parents=[common], help="Stokes and anti-Stokes curves -> stokes.csv")
    s.add_argument("--E", type=_complex_arg, required=True, help="energy as re,im")
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_stokes)

    s = sub.add_parser("compare", parents=[common], help="FD eigenvalues against quantization zeros")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("threshold", parents=[common], help="empirical symmetry-breaking threshold")
    s.add_argument("--E1", type=float, required=True)
    s.add_argument("--h", type=_float_list, default=None, help="comma-separated h values (default: sweep.h)")
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("figure1", parents=[common], help="eigenvalue scatter sweep -> spectrum.csv + figure1.svg")
    s.set_defaults(func=cmd_figure1)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PtwellError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
