"""Optimal liquidation schedules when impact and volatility vary in time."""

from .closed_form import (
    SolvableFamily,
    closed_form_cost,
    detect_family,
    solve_closed_form,
    solve_scenario_closed_form,
)
from .coefficients import CoefficientFunction
from .invariants import ermakov_invariant, solve_pinney
from .io import load_scenario, parse_scenario
from .model import (
    CostReport,
    OffShellError,
    Scenario,
    SolverError,
    Trajectory,
    el_residual,
    evaluate_cost,
)
from .normal_form import boundary_cost, log_form_potential, potential
from .oracle import convergence_order, richardson_cost, solve_discrete
from .reparam import build_clock, pull_back_trajectory, push_forward_trajectory, transform_scenario
from .riccati import coefficient_W, reconstruct, solve_riccati, solve_via_riccati
from .solvers import SolveResult, solve

__version__ = "0.1.0"
