"""Well-balanced central schemes for 2D balance laws via the deviation method.

The fully-discrete scheme evolves cell averages over Riemann-fan
subdomains (:mod:`wbkt.fullkt`); the semi-discrete scheme is its
``dt -> 0`` limit (:mod:`wbkt.semikt`).  Both evolve the deviation from a
known stationary state, which they therefore keep exactly.
"""
from .deviation import SchemeConfig, StationaryState
from .errors import (ConfigError, DegenerateFan, DivisionByZeroSpeed, GridMismatch,
                     NonphysicalState, NonPositiveError, PointOutsideCell, SolverError, WBKTError)
from .fullkt import step_fully_discrete
from .grid import BoundarySpec, Grid2D, StateField, fill_ghosts, make_grid
from .harness import ExperimentConfig, config_for, run_convergence, run_experiment
from .models import EulerModel, ScalarModel, burgers, linear_advection
from .semikt import integrate, semi_discrete_rhs, step_semi_discrete

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec", "ConfigError", "DegenerateFan", "DivisionByZeroSpeed", "EulerModel",
    "ExperimentConfig", "Grid2D", "GridMismatch", "NonPositiveError", "NonphysicalState",
    "PointOutsideCell", "ScalarModel", "SchemeConfig", "SolverError", "StateField",
    "StationaryState", "WBKTError", "burgers", "config_for", "fill_ghosts", "integrate",
    "linear_advection", "make_grid", "run_convergence", "run_experiment",
    "semi_discrete_rhs", "step_fully_discrete", "step_semi_discrete",
]
