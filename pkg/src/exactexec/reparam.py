"""Time reparametrisations ("clocks") between physical time s and trader time tau.

A clock is defined by its rate ``dtau/ds`` as a positive function of
physical time.  Under a clock the cost becomes

    int (eta / (ds/dtau)) (dx/dtau)^2 + lam sigma^2 (ds/dtau) x^2 dtau

so a trader-time problem is just the physical one with the effective
impact ``eta * rate`` and effective risk weight ``lam sigma^2 / rate``.

Clock kinds:

``Identity``        rate 1
``AlmgrenChriss``   rate ``sigma^2``
``FirstParameter``  rate ``(sigma/sigma0) sqrt(eta0/eta)`` with reference values at ``t0``
``SecondParameter`` rate ``1/eta``: unit effective impact, risk weight ``lam sigma^2 eta``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .interp import MonotoneCubic
from .model import Scenario, Trajectory
from .quadrature import cumulative_integral

__all__ = [
    "CLOCK_KINDS",
    "Clock",
    "EffectiveScenario",
    "build_clock",
    "transform_scenario",
    "pull_back_trajectory",
    "push_forward_trajectory",
]

CLOCK_KINDS = ("Identity", "AlmgrenChriss", "FirstParameter", "SecondParameter")
TABLE_POINTS = 4097


@dataclass(frozen=True)
class Clock:
    kind: str
    t0: float
    T: float
    rate: Callable = field(repr=False)
    rate_derivative: Callable = field(repr=False)
    s_table: np.ndarray = field(repr=False)
    tau_table: np.ndarray = field(repr=False)
    _forward: MonotoneCubic = field(repr=False)
    _inverse: MonotoneCubic = field(repr=False)

    @property
    def tauF(self) -> float:
        return float(self.tau_table[-1])

    def tau(self, s):
        """Trader time at physical time ``s`` (``tau(t0) = 0``)."""
        return self._forward(np.asarray(s, dtype=float))

    def s_of_tau(self, tau):
        """Physical time at trader time ``tau``: monotone cubic guess plus one Newton step."""
        tau = np.asarray(tau, dtype=float)
        s = np.minimum(np.maximum(self._inverse(tau), self.t0), self.T)
        s = s - (self._forward(s) - tau) / self.rate(s)
        return np.minimum(np.maximum(s, self.t0), self.T)


def build_clock(kind: str, scenario: Scenario, table_points: int = TABLE_POINTS) -> Clock:
    """Construct a clock for ``scenario`` with a quadrature-built forward table.

    Raises ``ValueError`` naming the first grid time where the rate is not
    positive.
    """
    eta, sigma = scenario.eta, scenario.sigma
    t0, T = scenario.t0, scenario.T
    if kind == "Identity":
        rate = np.ones_like
        drate = np.zeros_like
    elif kind == "AlmgrenChriss":
        def rate(s):
            return sigma.value(s) ** 2

        def drate(s):
            return 2 * sigma.value(s) * sigma.derivative(s, 1)
    elif kind == "FirstParameter":
        k = np.sqrt(float(eta.value(t0))) / float(sigma.value(t0))

        def rate(s):
            return k * sigma.value(s) / np.sqrt(eta.value(s))

        def drate(s):
            e = eta.value(s)
            return k * (sigma.derivative(s, 1) / np.sqrt(e) - 0.5 * sigma.value(s) * eta.derivative(s, 1) / e**1.5)
    elif kind == "SecondParameter":
        def rate(s):
            return 1.0 / eta.value(s)

        def drate(s):
            return -eta.derivative(s, 1) / eta.value(s) ** 2
    else:
        raise ValueError(f"unknown clock kind {kind!r}")

    check = np.linspace(t0, T, 1024)
    r = np.asarray(rate(check), dtype=float)
    bad = np.flatnonzero(~(r > 0))
    if bad.size:
        raise ValueError(f"{kind} clock rate is not positive at s={check[bad[0]]}")

    s_table = np.linspace(t0, T, table_points)
    s_table[-1] = T
    tau_table = cumulative_integral(rate, s_table)
    if np.any(np.diff(tau_table) <= 0):
        raise ValueError(f"{kind} clock is not strictly increasing")
    r_table = rate(s_table)
    forward = MonotoneCubic(s_table, tau_table, r_table)
    inverse = MonotoneCubic(tau_table, s_table, 1.0 / r_table)
    return Clock(kind, t0, T, rate, drate, s_table, tau_table, forward, inverse)


@dataclass(frozen=True)
class EffectiveScenario:
    """A scenario re-expressed in trader time on ``[0, tauF]``.

    Exposes the same weight interface as :class:`~exactexec.model.Scenario`
    (``impact``, ``impact_derivative``, ``risk_weight``) so the cost and
    residual routines apply unchanged.
    """

    clock: Clock
    scenario: Scenario

    @property
    def t0(self) -> float:
        return 0.0

    @property
    def T(self) -> float:
        return self.clock.tauF

    @property
    def x0(self) -> float:
        return self.scenario.x0

    @property
    def lam(self) -> float:
        return self.scenario.lam

    @property
    def span(self) -> float:
        return self.T

    def eta_eff(self, tau):
        s = self.clock.s_of_tau(tau)
        return self.scenario.eta.value(s) * self.clock.rate(s)

    def sigma2_eff(self, tau):
        s = self.clock.s_of_tau(tau)
        return self.scenario.sigma.value(s) ** 2 / self.clock.rate(s)

    def impact(self, tau):
        return self.eta_eff(tau)

    def impact_derivative(self, tau):
        s = self.clock.s_of_tau(tau)
        eta = self.scenario.eta
        r = self.clock.rate(s)
        return (eta.derivative(s, 1) * r + eta.value(s) * self.clock.rate_derivative(s)) / r

    def risk_weight(self, tau):
        return self.scenario.lam * self.sigma2_eff(tau)

    def breakpoints(self) -> np.ndarray:
        pts = self.scenario.breakpoints()
        pts = pts[(pts > self.scenario.t0) & (pts < self.scenario.T)]
        return self.clock.tau(pts) if pts.size else pts


def transform_scenario(clock: Clock, scenario: Scenario) -> EffectiveScenario:
    if clock.t0 != scenario.t0 or clock.T != scenario.T:
        raise ValueError("clock was built for a different span")
    return EffectiveScenario(clock, scenario)


def pull_back_trajectory(clock: Clock, tau_trajectory: Trajectory) -> Trajectory:
    """Physical-time schedule ``x(s) = X(tau(s))`` with chain-ruled derivatives."""
    X = tau_trajectory
    tol = 1e-12 * max(1.0, clock.tauF)
    if abs(X.t0) > tol or abs(X.T - clock.tauF) > tol:
        raise ValueError(f"trajectory span [{X.t0}, {X.T}] does not match clock span [0, {clock.tauF}]")

    def value(s):
        return X._value(clock.tau(s))

    def derivative(s):
        return X._derivative(clock.tau(s)) * clock.rate(s)

    second = None
    if X.has_second:
        def second(s):
            tau = clock.tau(s)
            r = clock.rate(s)
            return X._second(tau) * r * r + X._derivative(tau) * clock.rate_derivative(s)

    bp = None if X.breakpoints is None else clock.s_of_tau(X.breakpoints)
    return Trajectory(clock.t0, clock.T, value, derivative, second,
                      method=X.method, representation=X.representation,
                      family=X.family, params=dict(X.params), breakpoints=bp)


def push_forward_trajectory(clock: Clock, trajectory: Trajectory) -> Trajectory:
    """Trader-time schedule ``X(tau) = x(s(tau))``; the inverse of :func:`pull_back_trajectory`."""
    x = trajectory

    def value(tau):
        return x._value(clock.s_of_tau(tau))

    def derivative(tau):
        s = clock.s_of_tau(tau)
        return x._derivative(s) / clock.rate(s)

    second = None
    if x.has_second:
        def second(tau):
            s = clock.s_of_tau(tau)
            r = clock.rate(s)
            return (x._second(s) - x._derivative(s) * clock.rate_derivative(s) / r) / (r * r)

    bp = None if x.breakpoints is None else clock.tau(x.breakpoints)
    return Trajectory(0.0, clock.tauF, value, derivative, second,
                      method=x.method, representation=x.representation,
                      family=x.family, params=dict(x.params), breakpoints=bp)
