"""Ermakov-Pinney witnesses and the conserved quantity of ``x'' = W x``.

For a positive ``rho`` solving ``rho'' = W rho - 1/rho^3``,

    I = 1/2 [ (rho x' - x rho')^2 - (x / rho)^2 ]

is constant along every solution of ``x'' = W x``.  Differentiating ``I``
shows this is the sign that conserves it; the variant
``rho'' + W rho - 1/rho^3 = 0`` belongs to the oscillatory equation
``x'' = -W x`` and agrees with ours only at the constant-``W`` equilibrium
``rho = W^{-1/4}``.  For constant ``W = p`` the quantity is the energy
``1/2 [ x'^2 / sqrt(p) - sqrt(p) x^2 ]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import OffShellError, SolverError, Trajectory, second_derivative_on
from .ode import integrate_piecewise
from .riccati import _Q, _eval, _powers

__all__ = [
    "PinneyWitness",
    "PinneyCollapse",
    "solve_pinney",
    "ermakov_invariant",
    "invariant_samples",
    "energy_form",
    "SIGN_CONVENTION",
]

SIGN_CONVENTION = "rho'' = W rho - rho^-3 (conserving form; printed variant rho'' + W rho - rho^-3 = 0)"
COLLAPSE = 1e-8
_STEPS_PER_SPAN = 512


class PinneyCollapse(SolverError):
    """The witness ``rho`` fell to the collapse threshold."""


@dataclass(frozen=True)
class PinneyWitness:
    span: tuple
    nodes: np.ndarray = field(repr=False)
    rho_nodes: np.ndarray = field(repr=False)
    drho_nodes: np.ndarray = field(repr=False)
    W_used: Callable = field(repr=False)
    W_nodes: np.ndarray = field(repr=False)
    sign_convention: str = SIGN_CONVENTION

    def _eval(self, tau, nu):
        tau = np.asarray(tau, dtype=float)
        n = self.nodes
        i = np.clip(np.searchsorted(n, tau, side="right") - 1, 0, len(n) - 2)
        h = n[i + 1] - n[i]
        t = (tau - n[i]) / h
        r0, r1 = self.rho_nodes[i], self.rho_nodes[i + 1]
        d2 = lambda k, r: self.W_nodes[k] * r - r**-3
        data = np.stack([
            r0, self.drho_nodes[i] * h, d2(i, r0) * h * h,
            r1, self.drho_nodes[i + 1] * h, d2(i + 1, r1) * h * h,
        ], axis=-1)
        return np.sum((_powers(t, nu) @ _Q.T) * data, axis=-1) / h**nu

    def rho(self, tau):
        return self._eval(tau, 0)

    def drho(self, tau):
        return self._eval(tau, 1)

    def d2rho(self, tau):
        return self._eval(tau, 2)

    def residual(self, grid_points: int = 1001) -> float:
        """Sup-norm of ``rho'' - W rho + rho^-3`` on a uniform grid."""
        tau = np.linspace(self.span[0], self.span[1], grid_points)
        r = self.rho(tau)
        return float(np.max(np.abs(self.d2rho(tau) - _eval(self.W_used, tau) * r + r**-3)))


def solve_pinney(W: Callable, span, init=None, rtol: float = 1e-10, atol: float = 1e-12,
                 breakpoints=None) -> PinneyWitness:
    """Integrate the Pinney equation forward over ``span``.

    ``init`` is ``(rho(tau0), rho'(tau0))``; by default the witness starts at
    the equilibrium ``W(tau0)^{-1/4}`` with zero slope.  Integration restarts
    at ``breakpoints`` (default: ``W.breakpoints`` if present).
    """
    a, b = map(float, span)
    if breakpoints is None:
        breakpoints = getattr(W, "breakpoints", None)
    if init is None:
        w0 = float(W(a))
        if not w0 > 0:
            raise ValueError("default initialisation needs W(tau0) > 0; pass init")
        init = (w0 ** -0.25, 0.0)
    r0, dr0 = map(float, init)
    if not r0 > 0:
        raise ValueError("rho(tau0) must be positive")

    def rhs(t, y):
        return [y[1], float(W(t)) * y[0] - y[0] ** -3]

    def collapse(t, y):
        return y[0] - COLLAPSE

    collapse.terminal = True
    sol = integrate_piecewise(rhs, (a, b), [r0, dr0], breakpoints, events=collapse, method="DOP853",
                              rtol=rtol, atol=atol, max_step=(b - a) / _STEPS_PER_SPAN)
    if sol.t_events[0].size:
        raise PinneyCollapse(f"rho collapsed at tau={sol.t_events[0][0]}")
    if sol.status != 0 and sol.y[0, -1] < 1e-3 * r0:
        # the step size collapses with rho before the event can trigger
        raise PinneyCollapse(f"rho collapsed near tau={sol.t[-1]}")
    if sol.status != 0:
        raise SolverError(f"Pinney integration failed: {sol.message}")
    return PinneyWitness((a, b), sol.t, sol.y[0], sol.y[1], W, _eval(W, sol.t))


def invariant_samples(rho, drho, x, dx):
    return 0.5 * ((rho * dx - x * drho) ** 2 - (x / rho) ** 2)


def energy_form(p: float, x, dx):
    """Constant-``W`` specialisation ``1/2 [x'^2/sqrt(p) - sqrt(p) x^2]``."""
    r = math.sqrt(p)
    return 0.5 * (np.asarray(dx) ** 2 / r - r * np.asarray(x) ** 2)


def ermakov_invariant(witness: PinneyWitness, trajectory: Trajectory, grid_points: int = 1001,
                      on_shell_tol: float = 1e-4):
    """Sample ``I`` along ``trajectory`` and report its relative drift.

    The trajectory must solve ``x'' = W x`` for the witness's ``W``
    (residual sup-norm below ``on_shell_tol * max(1, max|x|)``), otherwise
    :class:`~exactexec.model.OffShellError` is raised.  Returns
    ``(samples, drift)`` with ``samples`` an ``(n, 2)`` array of ``(tau, I)``
    and ``drift = (max I - min I) / (|median I| + 1e-300)``.
    """
    a, b = witness.span
    tau = np.linspace(a, b, grid_points)
    x = np.asarray(trajectory._value(tau), dtype=float)
    h = (b - a) / (grid_points - 1)
    inner = tau[1:-1]
    d2x = second_derivative_on(trajectory, inner, h)
    res = float(np.max(np.abs(d2x - _eval(witness.W_used, inner) * x[1:-1]))) if inner.size else 0.0
    if not res < on_shell_tol * max(1.0, float(np.max(np.abs(x)))):
        raise OffShellError(f"trajectory does not solve x'' = W x (residual {res:.3e})")
    I = invariant_samples(witness.rho(tau), witness.drho(tau), x, trajectory._derivative(tau))
    drift = float((I.max() - I.min()) / (abs(np.median(I)) + 1e-300))
    return np.column_stack([tau, I]), drift
