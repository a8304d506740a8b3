"""Geometric exponential integrators for semilinear Poisson systems."""

from .integrators import (DISEX6, DisrkScheme, StepOutcome, discrete_gradient_step, disex_step,
                          energy_exp_step, exp_euler_step, exp_midpoint_step, integrate,
                          midpoint_step)
from .models import KdvSystem, NlsSystem, make_system, standard_initial_condition
from .psystem import DenseTestSystem, PoissonSystem, State, check_structure
from .solvers import SolverConfig, fixed_point_solve, newton_solve
from .spectral import SpectralGrid

__all__ = [
    "DISEX6", "DisrkScheme", "StepOutcome", "discrete_gradient_step", "disex_step",
    "energy_exp_step", "exp_euler_step", "exp_midpoint_step", "integrate", "midpoint_step",
    "KdvSystem", "NlsSystem", "make_system", "standard_initial_condition",
    "DenseTestSystem", "PoissonSystem", "State", "check_structure",
    "SolverConfig", "fixed_point_solve", "newton_solve", "SpectralGrid",
]

__version__ = "0.1.0"
