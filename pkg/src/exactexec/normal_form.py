"""The ``u = x sqrt(eta)`` substitution and boundary-evaluated costs.

Writing ``x = u / sqrt(eta)`` removes the first-derivative term from the
Euler-Lagrange equation, leaving ``u'' = V(s) u`` with

    V = eta''/(2 eta) + lam sigma^2/eta - (eta')^2/(4 eta^2).

On a solution, integrating the cost by parts collapses it onto the
start of the horizon, which is what :func:`boundary_cost` evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (
    CostReport,
    FrameProblem,
    OffShellError,
    Scenario,
    Trajectory,
    el_residual,
    second_derivative_on,
)

__all__ = [
    "NormalFormPotential",
    "potential",
    "log_form_potential",
    "x_to_u",
    "u_to_x",
    "u_residual",
    "boundary_cost",
    "ON_SHELL_TOL",
]

ON_SHELL_TOL = 1e-4


@dataclass(frozen=True)
class NormalFormPotential:
    """``V(s)`` together with its three named pieces."""

    eta_curvature: Callable = field(repr=False)
    risk: Callable = field(repr=False)
    eta_slope_sq: Callable = field(repr=False)
    accuracy_warning: bool = False

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.eta_curvature(s) + self.risk(s) - self.eta_slope_sq(s)


def potential(scenario: Scenario) -> NormalFormPotential:
    """Build ``V`` from ``eta``, ``sigma`` and ``lam`` directly.

    Tabulated impact has only a piecewise-linear second derivative, so the
    result carries ``accuracy_warning=True`` in that case.
    """
    eta, sigma, lam = scenario.eta, scenario.sigma, scenario.lam
    return NormalFormPotential(
        eta_curvature=lambda s: eta.derivative(s, 2) / (2 * eta.value(s)),
        risk=lambda s: lam * sigma.value(s) ** 2 / eta.value(s),
        eta_slope_sq=lambda s: eta.derivative(s, 1) ** 2 / (4 * eta.value(s) ** 2),
        accuracy_warning=eta.is_tabulated,
    )


def _reference(coef, t0):
    if "c0" in coef.params:
        return coef.params["c0"]
    return float(coef.value(t0))


def log_form_potential(scenario: Scenario) -> Callable:
    """``V`` via ``eta = eta0 e^{2 z1}``, ``sigma = sigma0 e^{z2}``.

    ``V = z1'' + (z1')^2 + (lam sigma0^2 / eta0) e^{2 (z2 - z1)}``.  The log
    coefficients are derived on the fly and never stored.
    """
    eta, sigma, lam = scenario.eta, scenario.sigma, scenario.lam
    eta0 = _reference(eta, scenario.t0)
    sigma0 = _reference(sigma, scenario.t0)

    def V(s):
        s = np.asarray(s, dtype=float)
        e, de, d2e = eta.value(s), eta.derivative(s, 1), eta.derivative(s, 2)
        z1 = 0.5 * np.log(e / eta0)
        z2 = np.log(sigma.value(s) / sigma0)
        dz1 = de / (2 * e)
        d2z1 = (d2e * e - de * de) / (2 * e * e)
        return d2z1 + dz1 * dz1 + lam * sigma0**2 / eta0 * np.exp(2 * (z2 - z1))

    return V


def x_to_u(trajectory: Trajectory, eta) -> Trajectory:
    """``u = x sqrt(eta)`` with chain-ruled derivatives."""

    def value(s):
        return trajectory._value(s) * np.sqrt(eta.value(s))

    def derivative(s):
        e = eta.value(s)
        return trajectory._derivative(s) * np.sqrt(e) + trajectory._value(s) * eta.derivative(s, 1) / (2 * np.sqrt(e))

    second = None
    if trajectory.has_second:
        def second(s):
            e, de, d2e = eta.value(s), eta.derivative(s, 1), eta.derivative(s, 2)
            r = np.sqrt(e)
            return (trajectory._second(s) * r + trajectory._derivative(s) * de / r
                    + trajectory._value(s) * (d2e / (2 * r) - de * de / (4 * e * r)))

    return Trajectory(trajectory.t0, trajectory.T, value, derivative, second,
                      method=trajectory.method, representation=trajectory.representation,
                      family=trajectory.family, params=dict(trajectory.params),
                      breakpoints=trajectory.breakpoints)


def u_to_x(u_trajectory: Trajectory, eta) -> Trajectory:
    """Inverse of :func:`x_to_u`: ``x = u / sqrt(eta)``."""
    u = u_trajectory

    def value(s):
        return u._value(s) / np.sqrt(eta.value(s))

    def derivative(s):
        e = eta.value(s)
        r = np.sqrt(e)
        return u._derivative(s) / r - u._value(s) * eta.derivative(s, 1) / (2 * e * r)

    second = None
    if u.has_second:
        def second(s):
            e, de, d2e = eta.value(s), eta.derivative(s, 1), eta.derivative(s, 2)
            r = np.sqrt(e)
            return (u._second(s) / r - u._derivative(s) * de / (e * r)
                    + u._value(s) * (0.75 * de * de / (e * e * r) - d2e / (2 * e * r)))

    return Trajectory(u.t0, u.T, value, derivative, second,
                      method=u.method, representation=u.representation,
                      family=u.family, params=dict(u.params), breakpoints=u.breakpoints)


def u_residual(V: Callable, u_trajectory: Trajectory, t0: float, T: float, grid_points: int = 1001):
    """Sup-norm of ``u'' - V u`` on the interior of a uniform grid."""
    h = (T - t0) / (grid_points - 1)
    s = t0 + h * np.arange(1, grid_points - 1)
    r = second_derivative_on(u_trajectory, s, h) - V(s) * u_trajectory._value(s)
    return float(np.max(np.abs(r)))


def boundary_cost(solution: Trajectory, scenario: Scenario, frame: str = "physical_x",
                  clock=None, rate: float | None = None) -> CostReport:
    """Optimal cost from the start-of-horizon boundary term alone.

    frames
        ``physical_x``  ``C = -eta x x'`` at ``t0``
        ``u_frame``     ``C = -(u u' - u^2 eta'/(2 eta))`` at ``t0``; ``solution`` is ``u``
        ``trader_tau``  ``C = -(eta / (ds/dtau)) x x'`` at ``tau0``; ``solution`` is in
                        trader time and ``clock`` is the :class:`~exactexec.reparam.Clock`
        ``clock_rate``  as ``trader_tau`` but with the rate ``dtau/ds`` at ``t0`` given
                        directly as ``rate``

    The formula is only valid on solutions, so the Euler-Lagrange residual
    is checked first (sup-norm below ``ON_SHELL_TOL * max(1, |x0|)``) and an
    :class:`OffShellError` raised otherwise.  The reported error estimate
    bounds the dropped bulk term by ``span * max|x| * residual``.  The
    impact/risk split is not available from the boundary and is reported
    as NaN.
    """
    scale = max(1.0, abs(scenario.x0))
    t0 = scenario.t0
    if frame == "physical_x":
        problem = scenario
        sup, _ = el_residual(scenario, solution)
        a = t0
        lead = float(scenario.impact(np.asarray(a)))
    elif frame == "u_frame":
        problem = scenario
        V = potential(scenario)
        sup = u_residual(V, solution, scenario.t0, scenario.T)
        scale = max(1.0, abs(scenario.x0) * math.sqrt(float(scenario.eta.value(t0))))
        a = t0
    elif frame == "trader_tau":
        if clock is None:
            raise ValueError("trader_tau frame needs a clock")
        from .reparam import transform_scenario

        problem = transform_scenario(clock, scenario)
        sup, _ = el_residual(problem, solution)
        a = problem.t0
        lead = float(problem.impact(np.asarray(a)))
    elif frame == "clock_rate":
        if rate is None or not rate > 0:
            raise ValueError("clock_rate frame needs a positive rate")
        sup = None
        a = solution.t0
        lead = float(scenario.impact(np.asarray(t0))) * rate
    else:
        raise ValueError(f"unknown frame {frame!r}")

    if sup is not None and not sup < ON_SHELL_TOL * scale:
        raise OffShellError(f"trajectory is not a solution (residual sup-norm {sup:.3e})")

    x = float(solution.value(a))
    dx = float(solution.derivative(a))
    if frame == "u_frame":
        e = float(scenario.eta.value(t0))
        de = float(scenario.eta.derivative(t0, 1))
        total = -(x * dx - 0.5 * x * x * de / e)
    else:
        total = -lead * x * dx

    if sup is None:
        err = 0.0
    else:
        grid = np.linspace(solution.t0, solution.T, 257)
        err = (solution.T - solution.t0) * float(np.max(np.abs(solution.value(grid)))) * sup
    return CostReport(total, math.nan, math.nan, f"boundary:{frame}", err)
