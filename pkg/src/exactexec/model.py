"""Problem instances, trajectories, the cost functional and its
Euler-Lagrange residual.

The cost of liquidating inventory ``x(s)`` over ``[t0, T]`` is

    C[x] = int_{t0}^{T} eta(s) x'(s)^2 + lam * sigma(s)^2 x(s)^2 ds

with ``x(t0) = x0`` and ``x(T) = 0``.  Its stationarity condition is

    eta x'' + eta' x' = lam sigma^2 x.

Every solver in the package is checked against these two definitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .coefficients import CoefficientFunction
from .interp import MonotoneCubic, fd_slopes
from .quadrature import gauss_kronrod

__all__ = [
    "Scenario",
    "Trajectory",
    "CostReport",
    "SolverError",
    "OffShellError",
    "evaluate_cost",
    "el_residual",
    "linear_schedule",
    "FrameProblem",
]


class SolverError(RuntimeError):
    """A solver could not produce a trajectory for a valid scenario."""


class OffShellError(ValueError):
    """A formula that is only valid on solutions was applied to a non-solution."""


def _scalar_or_array(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class Scenario:
    t0: float
    T: float
    x0: float
    lam: float
    eta: CoefficientFunction
    sigma: CoefficientFunction
    frame_label: str = "physical"

    def __post_init__(self):
        for name in ("t0", "T", "x0", "lam"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not self.T > self.t0:
            raise ValueError(f"T must exceed t0 (got t0={self.t0}, T={self.T})")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.frame_label not in ("physical", "trader"):
            raise ValueError("frame must be 'physical' or 'trader'")
        self.eta.check_positive(self.t0, self.T, "eta")
        self.sigma.check_positive(self.t0, self.T, "sigma")

    @property
    def span(self) -> float:
        return self.T - self.t0

    def impact(self, s):
        return self.eta.value(s)

    def impact_derivative(self, s):
        return self.eta.derivative(s, 1)

    def risk_weight(self, s):
        """``lam * sigma(s)**2``."""
        return self.lam * self.sigma.value(s) ** 2

    def breakpoints(self) -> np.ndarray:
        pts = []
        for c in (self.eta, self.sigma):
            if c.is_tabulated:
                pts.extend(c.params["knots"])
        return np.asarray(pts, dtype=float)

    def replace(self, **changes) -> "Scenario":
        data = {f: getattr(self, f) for f in ("t0", "T", "x0", "lam", "eta", "sigma", "frame_label")}
        data.update(changes)
        return Scenario(**data)


@dataclass(frozen=True)
class FrameProblem:
    """A cost functional given directly by its weight functions.

    Used for problems posed in a reparametrised clock, where the impact
    and risk weights are composite functions rather than named families.
    """

    t0: float
    T: float
    x0: float
    impact: Callable = field(repr=False)
    impact_derivative: Callable = field(repr=False)
    risk_weight: Callable = field(repr=False)
    label: str = ""

    @property
    def span(self) -> float:
        return self.T - self.t0


@dataclass(frozen=True)
class Trajectory:
    """An execution schedule on ``[t0, T]``.

    ``value`` and ``derivative`` accept scalars or arrays.  When the
    schedule is known in closed form a second-derivative callable is
    attached; otherwise ``second_derivative`` returns ``None`` and callers
    fall back to finite differences.
    """

    t0: float
    T: float
    _value: Callable = field(repr=False)
    _derivative: Callable = field(repr=False)
    _second: Callable | None = field(default=None, repr=False)
    method: str = ""
    representation: str = "closed-form"
    family: str | None = None
    params: Mapping[str, Any] = field(default_factory=dict)
    breakpoints: np.ndarray | None = field(default=None, repr=False)

    def value(self, s):
        return _scalar_or_array(self._value(np.asarray(s, dtype=float)))

    def derivative(self, s):
        return _scalar_or_array(self._derivative(np.asarray(s, dtype=float)))

    def second_derivative(self, s):
        if self._second is None:
            return None
        return _scalar_or_array(self._second(np.asarray(s, dtype=float)))

    @property
    def has_second(self) -> bool:
        return self._second is not None

    @property
    def x0(self) -> float:
        return self.value(self.t0)

    def sample(self, n: int = 513):
        s = np.linspace(self.t0, self.T, n)
        return s, self.value(s), self.derivative(s)

    @classmethod
    def from_samples(cls, grid, values, method: str, slopes=None) -> "Trajectory":
        """Monotone piecewise-cubic schedule through samples on a uniform grid.

        Node slopes default to fourth-order finite differences, which the
        monotone limiter leaves alone wherever the data are monotone.
        """
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if slopes is None:
            slopes = fd_slopes(values, grid[1] - grid[0])
        spline = MonotoneCubic(grid, values, slopes)
        return cls(
            float(grid[0]),
            float(grid[-1]),
            spline,
            lambda s: spline(s, 1),
            None,
            method=method,
            representation="sampled",
            params={"N": len(grid) - 1},
            breakpoints=grid,
        )


@dataclass(frozen=True)
class CostReport:
    total: float
    impact_term: float
    risk_term: float
    method: str
    abs_error_estimate: float

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "impact_term": self.impact_term,
            "risk_term": self.risk_term,
            "method": self.method,
            "abs_error_estimate": self.abs_error_estimate,
        }


def linear_schedule(t0: float, T: float, x0: float, method: str = "linear") -> Trajectory:
    """Straight-line liquidation ``x0 (T - s) / (T - t0)``."""
    span = T - t0
    return Trajectory(
        t0, T,
        lambda s: x0 * (T - s) / span,
        lambda s: np.full_like(s, -x0 / span),
        lambda s: np.zeros_like(s),
        method=method,
        family="Linear",
        params={"x0": x0},
    )


def _check_span(problem, trajectory, rtol=1e-12):
    scale = rtol * max(1.0, abs(problem.t0), abs(problem.T))
    if abs(trajectory.t0 - problem.t0) > scale or abs(trajectory.T - problem.T) > scale:
        raise ValueError(
            f"trajectory span [{trajectory.t0}, {trajectory.T}] does not match "
            f"scenario span [{problem.t0}, {problem.T}]"
        )


def evaluate_cost(problem, trajectory: Trajectory, rtol: float = 1e-10, atol: float = 1e-14) -> CostReport:
    """Integrate the cost functional along ``trajectory`` by adaptive quadrature.

    ``problem`` is a :class:`Scenario` or anything exposing ``t0``, ``T``,
    ``impact(s)`` and ``risk_weight(s)`` (e.g. a reparametrised scenario).
    Raises :class:`~exactexec.quadrature.QuadratureError` with the best
    estimate attached if refinement does not converge.
    """
    _check_span(problem, trajectory)
    a, b = problem.t0, problem.T
    pts = [] if trajectory.breakpoints is None else list(trajectory.breakpoints)
    if hasattr(problem, "breakpoints"):
        pts.extend(problem.breakpoints())
    pts = np.asarray(pts, dtype=float) if pts else None

    impact = gauss_kronrod(
        lambda s: problem.impact(s) * trajectory._derivative(s) ** 2, a, b, rtol, atol, breakpoints=pts
    )
    risk = gauss_kronrod(
        lambda s: problem.risk_weight(s) * trajectory._value(s) ** 2, a, b, rtol, atol, breakpoints=pts
    )
    return CostReport(
        total=impact.value + risk.value,
        impact_term=impact.value,
        risk_term=risk.value,
        method=trajectory.method or "quadrature",
        abs_error_estimate=impact.abs_error + risk.abs_error,
    )


def second_derivative_on(trajectory: Trajectory, s: np.ndarray, h: float, breakpoints=None) -> np.ndarray:
    """Analytic second derivative if available, else a finite difference with step ``h``.

    The difference is the five-point central stencil (fourth order) except
    where it would straddle one of ``breakpoints`` (places where the third
    derivative may jump) or leave the span; there a five-point one-sided
    stencil (third order) on a clean side is used instead.
    """
    d2 = trajectory.second_derivative(s)
    if d2 is not None:
        return np.asarray(d2, dtype=float)
    s = np.asarray(s, dtype=float)
    v = trajectory._value
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    a, b = trajectory.t0, trajectory.T
    bp = np.asarray([] if breakpoints is None else breakpoints, dtype=float)
    eps = 1e-12 * (b - a)
    gap = bp[None, :] - s[:, None]
    # a side is clean if no breakpoint lies strictly inside it and it stays in the span
    clean_back = ~np.any((gap < -eps) & (gap > -4 * h), axis=1) & (s - 4 * h >= a - eps)
    clean_fwd = ~np.any((gap > eps) & (gap < 4 * h), axis=1) & (s + 4 * h <= b + eps)
    central = ~np.any(np.abs(gap) < 2 * h - eps, axis=1) & (s - 2 * h >= a - eps) & (s + 2 * h <= b + eps)
    back = ~central & clean_back
    fwd = ~central & ~clean_back & clean_fwd
    plain = ~(central | back | fwd)
    if np.any(central):
        t = s[central]
        out[central] = (-v(t + 2 * h) + 16 * v(t + h) - 30 * v(t) + 16 * v(t - h) - v(t - 2 * h)) / (12 * h * h)
    for mask, sgn in ((back, -1.0), (fwd, 1.0)):
        if np.any(mask):
            t = s[mask]
            k = sgn * h
            out[mask] = (35 * v(t) - 104 * v(t + k) + 114 * v(t + 2 * k) - 56 * v(t + 3 * k) + 11 * v(t + 4 * k)) / (12 * h * h)
    if np.any(plain):
        # cramped between breakpoints or ends: fall back to three points
        t = s[plain]
        out[plain] = (v(t + h) - 2 * v(t) + v(t - h)) / (h * h)
    return float(out[0]) if scalar else out


def el_residual(problem, trajectory: Trajectory, grid_points: int = 1001):
    """Euler-Lagrange residual ``eta x'' + eta' x' - lam sigma^2 x`` on interior grid points.

    Returns ``(sup_norm, samples)`` where ``samples`` is an ``(n, 2)`` array
    of ``(s, residual)`` rows.
    """
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    _check_span(problem, trajectory)
    h = (problem.T - problem.t0) / (grid_points - 1)
    s = problem.t0 + h * np.arange(1, grid_points - 1)
    x = trajectory._value(s)
    dx = trajectory._derivative(s)
    knots = problem.breakpoints() if hasattr(problem, "breakpoints") else None
    d2x = second_derivative_on(trajectory, s, h, knots)
    r = problem.impact(s) * d2x + problem.impact_derivative(s) * dx - problem.risk_weight(s) * x
    r = np.asarray(r, dtype=float)
    return float(np.max(np.abs(r))), np.column_stack([s, r])
