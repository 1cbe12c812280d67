"""The check battery behind ``exactexec verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .invariants import ermakov_invariant, solve_pinney
from .model import Scenario, el_residual, evaluate_cost, second_derivative_on
from .normal_form import boundary_cost
from .oracle import richardson_cost
from .riccati import reconstruct, coefficient_W, solve_riccati
from .solvers import solve

__all__ = ["Check", "run_checks", "format_table"]

_TINY = 1e-300


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


def _rel(a, b):
    return abs(a - b) / max(abs(b), _TINY) if a != b else 0.0


def run_checks(scenario: Scenario, tol: float = 1e-6, grid: int = 4096) -> list[Check]:
    """Solve ``scenario`` by the automatic path and cross-check the result.

    Every check reports a dimensionless error compared against ``tol``:

    boundary        endpoint errors relative to ``max(1, |x0|)``
    el_residual     residual sup-norm relative to the largest term of the equation
    cost_quadrature closed/boundary total vs. adaptive quadrature of the cost
    boundary_cost   start-of-horizon boundary formula vs. the reported total
    oracle          reported total vs. the Richardson-extrapolated discrete optimum
    ermakov_drift   relative drift of the Ermakov invariant along the
                    trader-time Riccati solution
    """
    result = solve(scenario)
    traj, cost = result.trajectory, result.cost
    x0 = scenario.x0
    scale = max(1.0, abs(x0))
    checks = []

    err = max(abs(traj.value(scenario.t0) - x0), abs(traj.value(scenario.T))) / scale
    checks.append(Check("boundary", err, tol))

    n = 1001
    sup, samples = el_residual(scenario, traj, n)
    s = samples[:, 0]
    h = scenario.span / (n - 1)
    terms = max(
        float(np.max(np.abs(scenario.impact(s) * second_derivative_on(traj, s, h, scenario.breakpoints())))),
        float(np.max(np.abs(scenario.impact_derivative(s) * traj.derivative(s)))),
        float(np.max(np.abs(scenario.risk_weight(s) * traj.value(s)))),
    )
    checks.append(Check("el_residual", sup / terms if sup else 0.0, tol))

    quad = evaluate_cost(scenario, traj)
    checks.append(Check("cost_quadrature", _rel(cost.total, quad.total), tol))

    bnd = boundary_cost(traj, scenario, "physical_x")
    checks.append(Check("boundary_cost", _rel(bnd.total, cost.total), tol))

    ref, _ = richardson_cost(scenario, grid)
    checks.append(Check("oracle", _rel(cost.total, ref), tol))

    W = coefficient_W(scenario, "tau_frame")
    sol = solve_riccati(W, W.span)
    tau_traj, _ = reconstruct(sol, x0)
    init = None if float(W(W.span[0])) > 0 else (1.0, 1.0)
    witness = solve_pinney(W, W.span, init)
    _, drift = ermakov_invariant(witness, tau_traj)
    checks.append(Check("ermakov_drift", drift, tol))
    return checks


def format_table(checks, header: str = "") -> str:
    lines = [header] if header else []
    lines.append(f"{'check':<16} {'error':>12} {'tol':>10}  result")
    for c in checks:
        lines.append(f"{c.name:<16} {c.value:>12.3e} {c.tol:>10.1e}  {'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)
