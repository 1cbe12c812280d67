"""Riccati reduction of ``x'' = W x``.

With ``F = f'`` solving ``F' + F^2 = W``, every solution of the linear
equation vanishing at the right end is proportional to

    e^{f(tau)} int_tau^{tauF} e^{-2 f(z)} dz,

and on the optimum the cost (unit impact) is

    x0^2 ( e^{-2 f(tau0)} / int_{tau0}^{tauF} e^{-2f} - F(tau0) ).

The representation is normalised by its boundary data, so the choice of
Riccati branch only matters through blow-up: the default terminal
condition ``F(tauF) = 0`` integrated backward stays in
``(-sqrt(sup W), 0]`` whenever ``W >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import CostReport, Scenario, SolverError, Trajectory, evaluate_cost, FrameProblem
from .normal_form import potential, u_to_x
from .ode import integrate_piecewise
from .quadrature import cumulative_integral, gk15_panels
from .reparam import Clock, build_clock, pull_back_trajectory

__all__ = [
    "RiccatiBlowUp",
    "RiccatiSolution",
    "CoefficientW",
    "solve_riccati",
    "reconstruct",
    "coefficient_W",
    "solve_via_riccati",
    "BLOW_UP",
]

BLOW_UP = 1e8
_STEPS_PER_SPAN = 512
# tolerance on the dense-output defect F' + F^2 - W inside each step,
# relative to max(1, max|W|); the step cap shrinks until it is met
DEFECT_RTOL = 1e-7
_MAX_REFINE = 4


class RiccatiBlowUp(SolverError):
    """The Riccati solution diverged inside the requested span."""


# quintic Hermite basis on [0, 1]; columns: value/slope/curvature at 0 then at 1
_Q = np.array([
    [1, 0, 0, -10, 15, -6],
    [0, 1, 0, -6, 8, -3],
    [0, 0, 0.5, -1.5, 1.5, -0.5],
    [0, 0, 0, 10, -15, 6],
    [0, 0, 0, -4, 7, -3],
    [0, 0, 0, 0.5, -1, 0.5],
], dtype=float)


def _powers(t, nu):
    t = np.asarray(t, dtype=float)
    cols = []
    for k in range(6):
        if k < nu:
            cols.append(np.zeros_like(t))
        else:
            c = math.factorial(k) // math.factorial(k - nu)
            cols.append(c * t ** (k - nu))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class RiccatiSolution:
    """Log-derivative ``F`` and its antiderivative ``f`` (``f(span[0]) = 0``).

    Between accepted Runge-Kutta steps ``F`` is a cubic Hermite interpolant
    of ``(F, W - F^2)`` and ``f`` a quintic Hermite of ``(f, F, W - F^2)``.
    ``blow_up`` is the time where ``|F|`` crossed ``BLOW_UP``, if it did.
    """

    span: tuple
    nodes: np.ndarray = field(repr=False)
    F_nodes: np.ndarray = field(repr=False)
    f_nodes: np.ndarray = field(repr=False)
    W_nodes: np.ndarray = field(repr=False)
    W: Callable = field(repr=False)
    condition: tuple = ("terminal", 0.0)
    blow_up: float | None = None
    _J_nodes: np.ndarray | None = field(default=None, repr=False)

    def _locate(self, tau):
        tau = np.asarray(tau, dtype=float)
        n = self.nodes
        i = np.clip(np.searchsorted(n, tau, side="right") - 1, 0, len(n) - 2)
        h = n[i + 1] - n[i]
        return i, h, (tau - n[i]) / h

    def F(self, tau, nu: int = 0):
        """``F`` (``nu = 0``) or its interpolated derivative (``nu = 1``)."""
        i, h, t = self._locate(tau)
        y0, y1 = self.F_nodes[i], self.F_nodes[i + 1]
        m0 = (self.W_nodes[i] - y0 * y0) * h
        m1 = (self.W_nodes[i + 1] - y1 * y1) * h
        if nu == 0:
            t2, t3 = t * t, t * t * t
            return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0
                    + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1)
        t2 = t * t
        return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0
                + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h

    def f(self, tau, nu: int = 0):
        i, h, t = self._locate(tau)
        F0, F1 = self.F_nodes[i], self.F_nodes[i + 1]
        data = np.stack([
            self.f_nodes[i], F0 * h, (self.W_nodes[i] - F0 * F0) * h * h,
            self.f_nodes[i + 1], F1 * h, (self.W_nodes[i + 1] - F1 * F1) * h * h,
        ], axis=-1)
        basis = _powers(t, nu) @ _Q.T
        return np.sum(basis * data, axis=-1) / h**nu

    def residual(self, grid_points: int = 1001) -> float:
        """Sup-norm of ``F' + F^2 - W`` on a uniform grid over the span."""
        tau = np.linspace(self.span[0], self.span[1], grid_points)
        return float(np.max(np.abs(self.F(tau, 1) + self.F(tau) ** 2 - _eval(self.W, tau))))

    def tail_integral(self, tau):
        """``int_tau^{span end} e^{-2 f(z)} dz`` on the dense output."""
        tau = np.asarray(tau, dtype=float)
        i, _, _ = self._locate(tau)
        g = lambda z: np.exp(-2.0 * self.f(z))
        flat_i = np.atleast_1d(i).ravel()
        flat_t = np.atleast_1d(tau).ravel()
        part, _ = gk15_panels(g, flat_t, self.nodes[flat_i + 1])
        out = part + self._J_nodes[flat_i + 1]
        return out.reshape(tau.shape)


def _eval(W, tau):
    tau = np.asarray(tau, dtype=float)
    try:
        out = np.asarray(W(tau), dtype=float)
        if out.shape == tau.shape:
            return out
    except Exception:
        pass
    return np.vectorize(lambda t: float(W(t)))(tau)


def solve_riccati(W: Callable, span, condition=("terminal", 0.0), rtol: float = 1e-10,
                  atol: float = 1e-12, max_step: float | None = None, breakpoints=None) -> RiccatiSolution:
    """Integrate ``F' = W - F^2`` together with ``f' = F`` over ``span``.

    ``condition`` is ``("terminal", c)`` for ``F(span end) = c`` (integrated
    backward, the default with ``c = 0``) or ``("initial", c)`` for
    ``F(span start) = c``.  If ``|F|`` reaches ``BLOW_UP`` the returned
    solution covers only the part integrated so far and has ``blow_up``
    set; :func:`reconstruct` refuses such solutions.

    Integration restarts at ``breakpoints`` (default: ``W.breakpoints`` if
    present), the places where ``W`` has a derivative jump.
    """
    a, b = map(float, span)
    if breakpoints is None:
        breakpoints = getattr(W, "breakpoints", None)
    if not b > a:
        raise ValueError("span must be increasing")
    kind, c = condition
    c = float(c)
    if kind not in ("terminal", "initial") or not math.isfinite(c):
        raise ValueError(f"bad condition {condition!r}")
    auto = max_step is None
    if auto:
        max_step = (b - a) / _STEPS_PER_SPAN

    def rhs(t, y):
        w = float(W(t))
        if not math.isfinite(w):
            raise ValueError(f"non-finite W sample at tau={t}")
        return [w - y[0] * y[0], y[0]]

    def diverge(t, y):
        return abs(y[0]) - BLOW_UP

    diverge.terminal = True

    t_span = (b, a) if kind == "terminal" else (a, b)
    for _ in range(_MAX_REFINE + 1):
        sol = integrate_piecewise(rhs, t_span, [c, 0.0], breakpoints, events=diverge, method="DOP853",
                                  rtol=rtol, atol=atol, max_step=max_step)
        if sol.status < 0:
            raise SolverError(f"Riccati integration failed: {sol.message}")
        t, F, f = sol.t, sol.y[0], sol.y[1]
        blow_up = float(sol.t_events[0][0]) if sol.t_events[0].size else None
        if kind == "terminal":
            t, F, f = t[::-1], F[::-1], f[::-1]
        f = f - f[0]
        Wn = _eval(W, t)
        res = RiccatiSolution((float(t[0]), float(t[-1])), t, F, f, Wn, W, (kind, c), blow_up)
        if not auto or blow_up is not None or len(t) < 2:
            break
        # quarter points: the leading derivative error of a cubic Hermite vanishes at midpoints
        mid = np.concatenate([0.75 * t[:-1] + 0.25 * t[1:], 0.25 * t[:-1] + 0.75 * t[1:]])
        defect = float(np.max(np.abs(res.F(mid, 1) + res.F(mid) ** 2 - _eval(W, mid))))
        tol = DEFECT_RTOL * max(1.0, float(np.max(np.abs(Wn))))
        if defect <= tol:
            break
        # the Hermite derivative error scales with the cube of the step
        max_step *= max(0.125, 0.8 * (tol / defect) ** (1.0 / 3.0))
    if blow_up is None:
        J = cumulative_integral(lambda z: np.exp(-2.0 * res.f(z)), t, rtol=1e-13)
        object.__setattr__(res, "_J_nodes", J[-1] - J)
    return res


def reconstruct(riccati: RiccatiSolution, x0: float, tau0: float | None = None,
                tauF: float | None = None):
    """Optimal schedule and unit-impact cost from a Riccati solution.

    ``x(tau) = x0 e^{f(tau) - f(tau0)} J(tau) / J(tau0)`` with
    ``J(tau) = int_tau^{tauF} e^{-2f}``.  Returns ``(trajectory, report)``;
    the report's total is the boundary formula and the split is from
    quadrature of ``x'^2`` and ``W x^2``.
    """
    if riccati.blow_up is not None:
        raise RiccatiBlowUp(f"Riccati solution blows up at tau={riccati.blow_up}")
    a, b = riccati.span
    tau0 = a if tau0 is None else float(tau0)
    tauF = b if tauF is None else float(tauF)
    if tau0 < a or tauF > b or not tauF > tau0:
        raise ValueError(f"[{tau0}, {tauF}] is not inside the Riccati span [{a}, {b}]")
    x0 = float(x0)
    JF = float(riccati.tail_integral(tauF)) if tauF < b else 0.0
    f0 = float(riccati.f(tau0))
    J0 = float(riccati.tail_integral(tau0)) - JF
    scale = x0 / J0

    def value(tau):
        ratio = (riccati.tail_integral(tau) - JF) / J0
        ratio = np.where(tau == tau0, 1.0, np.where(tau == tauF, 0.0, ratio))
        return x0 * np.exp(riccati.f(tau) - f0) * ratio

    def derivative(tau):
        return riccati.F(tau) * value(tau) - scale * np.exp(-riccati.f(tau) - f0)

    def second(tau):
        F = riccati.F(tau)
        return (riccati.F(tau, 1) + F * F) * value(tau)

    traj = Trajectory(tau0, tauF, value, derivative, second, method="riccati",
                      representation="riccati", breakpoints=riccati.nodes)
    total = x0 * x0 * (math.exp(-2.0 * f0) / J0 - float(riccati.F(tau0)))
    frame = FrameProblem(tau0, tauF, x0, np.ones_like, np.zeros_like,
                         lambda t: _eval(riccati.W, t), "riccati")
    split = evaluate_cost(frame, traj)
    err = split.abs_error_estimate + abs(total - split.total)
    return traj, CostReport(total, split.impact_term, split.risk_term, "riccati", err)


@dataclass(frozen=True)
class CoefficientW:
    """``W`` on its natural span, plus the clock used to build it (if any)."""

    fn: Callable = field(repr=False)
    span: tuple
    frame: str
    clock: Clock | None = None
    breakpoints: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, tau):
        return self.fn(np.asarray(tau, dtype=float))


def coefficient_W(scenario: Scenario, frame: str = "tau_frame", clock: Clock | None = None) -> CoefficientW:
    """Right-hand side ``W`` of ``x'' = W x`` in one of two frames.

    ``u_frame_s``: the normal-form potential in physical time.
    ``tau_frame``: ``lam sigma^2 eta`` composed with the inverse of the
    unit-impact clock ``dtau/ds = 1/eta``.
    """
    if frame == "u_frame_s":
        return CoefficientW(potential(scenario), (scenario.t0, scenario.T), frame,
                            breakpoints=_interior(scenario.breakpoints(), scenario.t0, scenario.T))
    if frame != "tau_frame":
        raise ValueError(f"unknown frame {frame!r}")
    if clock is None:
        clock = build_clock("SecondParameter", scenario)
    elif clock.kind != "SecondParameter":
        raise ValueError("tau_frame needs the SecondParameter clock")
    lam, eta, sigma = scenario.lam, scenario.eta, scenario.sigma

    def W(tau):
        s = clock.s_of_tau(tau)
        return lam * sigma.value(s) ** 2 * eta.value(s)

    knots = _interior(scenario.breakpoints(), scenario.t0, scenario.T)
    return CoefficientW(W, (0.0, clock.tauF), frame, clock, clock.tau(knots) if knots.size else knots)


def _interior(pts, a, b):
    pts = np.asarray(pts, dtype=float)
    return pts[(pts > a) & (pts < b)]


def solve_via_riccati(scenario: Scenario, frame: str = "tau_frame"):
    """Physical-time optimum through the Riccati reduction.

    Returns ``(trajectory, cost_report, riccati_solution, W)``.  In the
    ``tau_frame`` the reconstructed schedule is pulled back through the
    clock and the cost carries over unchanged; in ``u_frame_s`` the
    schedule is mapped with ``x = u / sqrt(eta)`` and the boundary term of
    the transformed cost is added back.
    """
    W = coefficient_W(scenario, frame)
    sol = solve_riccati(W, W.span)
    if sol.blow_up is not None:
        raise RiccatiBlowUp(f"Riccati solution blows up at tau={sol.blow_up}")
    if frame == "tau_frame":
        tau_traj, rep = reconstruct(sol, scenario.x0)
        traj = pull_back_trajectory(W.clock, tau_traj)
        method = "riccati:tau"
        total = rep.total
    else:
        e0 = float(scenario.eta.value(scenario.t0))
        de0 = float(scenario.eta.derivative(scenario.t0, 1))
        u0 = scenario.x0 * math.sqrt(e0)
        u_traj, rep = reconstruct(sol, u0)
        traj = u_to_x(u_traj, scenario.eta)
        method = "riccati:u"
        total = rep.total + 0.5 * u0 * u0 * de0 / e0
    traj = Trajectory(traj.t0, traj.T, traj._value, traj._derivative, traj._second,
                      method=method, representation="riccati", breakpoints=traj.breakpoints)
    split = evaluate_cost(scenario, traj)
    err = split.abs_error_estimate + abs(total - split.total)
    return traj, CostReport(total, split.impact_term, split.risk_term, method, err), sol, W
