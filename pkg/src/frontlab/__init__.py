"""frontlab: traveling fronts of reaction-diffusion systems, weighted spectra
and the stable foliation of a neighbourhood of a front.

Modules
-------
model     reaction terms with the product structure, built-in models
grid      spatial grid, exponential weights, stencils, norms
linalg    banded LU, rightmost eigenvalues, trapezoid rule
front     front profiles by Newton, tail rates, shifts, continuation
spectrum  weighted linearization, essential and point spectrum, projections
evolve    Crank-Nicolson and IMEX stepping, decay rates, the nonlinearity
manifold  Lyapunov-Perron fixed points, stable manifolds, foliation
cli       ``frontlab run`` / ``frontlab describe``
"""
from .model import ReactionModel, builtin_model
from .grid import SpatialGrid, Weight, make_grid, make_weight, norm, beta_norm
from .front import FrontProfile, solve_front, shift_front, initial_guess, fit_decay_rates
from .spectrum import (WeightedOperator, assemble_linearization, mid_window_weight,
                       point_spectrum, adjoint_zero_mode, essential_spectrum_curves)
from .evolve import RateBundle, Trajectory, select_rates, evolve_semilinear, evolve_full
from .manifold import LPConfig, StableFoliation, foliate, lp_fixed_point, verify_theorem

__version__ = "0.1.0"

__all__ = ["ReactionModel", "builtin_model", "SpatialGrid", "Weight", "make_grid",
           "make_weight", "norm", "beta_norm", "FrontProfile", "solve_front", "shift_front",
           "initial_guess", "fit_decay_rates", "WeightedOperator", "assemble_linearization",
           "mid_window_weight", "point_spectrum", "adjoint_zero_mode",
           "essential_spectrum_curves", "RateBundle", "Trajectory", "select_rates",
           "evolve_semilinear", "evolve_full", "LPConfig", "StableFoliation", "foliate",
           "lp_fixed_point", "verify_theorem"]
