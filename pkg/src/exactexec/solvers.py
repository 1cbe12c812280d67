"""Method dispatch: closed form, then Riccati, then the discrete oracle."""

from __future__ import annotations

from dataclasses import dataclass

from .closed_form import SolvableFamily, detect_family, solve_scenario_closed_form
from .model import CostReport, Scenario, SolverError, Trajectory
from .oracle import solve_discrete
from .riccati import solve_via_riccati

__all__ = ["METHODS", "SolveResult", "solve"]

METHODS = ("auto", "closed-form", "riccati", "oracle")


@dataclass(frozen=True)
class SolveResult:
    trajectory: Trajectory
    cost: CostReport
    method: str
    family: SolvableFamily | None = None


def solve(scenario: Scenario, method: str = "auto", grid: int = 4096) -> SolveResult:
    """Optimal schedule and cost for ``scenario``.

    ``auto`` takes the first path that applies: a matching closed-form
    family, the Riccati reduction under the unit-impact clock, and the
    discrete oracle on ``grid`` intervals.  A forced method that cannot
    handle the scenario raises :class:`~exactexec.model.SolverError`.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed-form"):
        family = detect_family(scenario)
        if family is not None:
            traj, cost, family = solve_scenario_closed_form(scenario, family)
            return SolveResult(traj, cost, "closed-form", family)
        if method == "closed-form":
            raise SolverError("scenario does not match a closed-form family")
    if method in ("auto", "riccati"):
        try:
            traj, cost, _, _ = solve_via_riccati(scenario)
            return SolveResult(traj, cost, "riccati")
        except (SolverError, ValueError):
            if method == "riccati":
                raise
    traj, cost = solve_discrete(scenario, grid)
    return SolveResult(traj, cost, "oracle")
