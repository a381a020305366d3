"""Spectra of PT-symmetric perturbed double-well operators: finite differences against complex WKB."""

from .actions import ActionEvaluator, ActionSet, action_I, action_J, action_set, dI_de, dI_dE
from .bifurcation import BifurcationModel, PairKind, build_model, classify, from_window, predicted_pair, to_window
from .config import RunConfig, figure1_config, load_config
from .errors import PtwellError
from .fdsolve import EigenpairSet, Grid, TridiagonalOperator, assemble, eigs_near, eigs_window, grid_selftest
from .harness import compare_spectrum, empirical_threshold, figure1, run_sweep
from .numerics import ComplexPolynomial, Rectangle, chebyshev_rule, newton_refine, poly_roots, winding_count
from .potential import PerturbedPotential, WellStructure, a7_check, classify_wells, pt_check
from .quantization import SpectralParams, bs_levels, eval_f, find_f_roots, gamma_slope, localization_radius
from .stokes import StokesCurve, seed_angles, trace_family, trace_stokes
from .turning import TurningPoints, continue_path, turning_points

__version__ = "0.1.0"
