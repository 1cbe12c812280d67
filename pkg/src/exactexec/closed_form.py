"""Exact optimal schedules and costs for the solvable coefficient families.

Physical-time families (time variable ``s``):

* ``ConstantCoefficients``  constant impact ``eta0`` and volatility ``sigma0``
* ``CoshFamily``   ``eta = eta0 gamma^2 cosh^2(a s)``, ``sigma = sigma0 gamma cosh(a s)``
* ``ExpFamily``    ``eta = eta0 e^{zeta0 s}``, ``sigma = sigma0 e^{zeta0 s / 2}``

Trader-time families (time variable ``tau`` of a reparametrised clock):

* ``ExpProductFamily``  ``eta sigma^2 = A e^{2 alpha tau}`` under the clock
  ``ds/dtau = sqrt(eta/eta0) * sigma0/sigma``; the equation becomes
  ``x'' + alpha x' = (lam sigma0^2/eta0) x``
* ``ConstProductFamily``  ``lam sigma^2 eta = p`` under ``ds/dtau = eta``
* ``QuadraticProductFamily``  ``lam sigma^2 eta = p (1 + p tau^2)`` under ``ds/dtau = eta``

All hyperbolic ratios are evaluated in an overflow-safe form, and every
family falls back to the analytic straight-line limit when its rate
parameter squared drops below ``KAPPA2_FLOOR``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import (
    CostReport,
    FrameProblem,
    Scenario,
    Trajectory,
    evaluate_cost,
)
from .quadrature import cumulative_integral, gauss_kronrod

__all__ = [
    "SolvableFamily",
    "FAMILY_TAGS",
    "TRADER_TIME_FAMILIES",
    "KAPPA2_FLOOR",
    "solve_closed_form",
    "closed_form_cost",
    "family_problem",
    "detect_family",
    "solve_scenario_closed_form",
    "exp_product_cost_as_printed",
]

KAPPA2_FLOOR = 1e-14
_LOG_SWITCH = 30.0

FAMILY_TAGS = (
    "ConstantCoefficients",
    "CoshFamily",
    "ExpFamily",
    "ExpProductFamily",
    "ConstProductFamily",
    "QuadraticProductFamily",
)
TRADER_TIME_FAMILIES = ("ExpProductFamily", "ConstProductFamily", "QuadraticProductFamily")

_PARAMS = {
    "ConstantCoefficients": ("eta0", "sigma0"),
    "CoshFamily": ("eta0", "gamma", "a", "sigma0"),
    "ExpFamily": ("eta0", "sigma0", "zeta0"),
    "ExpProductFamily": ("alpha", "A", "eta0", "sigma0"),
    "ConstProductFamily": ("p",),
    "QuadraticProductFamily": ("p",),
}
_SCALE = {"eta0", "sigma0", "gamma", "A"}


@dataclass(frozen=True)
class SolvableFamily:
    """A coefficient family with a known exact optimum.

    ``p`` for the product families already includes the risk aversion
    (``p = lam sigma0^2 eta0``), so the ``lam`` passed to the solver is
    ignored for them.  ``ExpProductFamily`` needs the reference constants
    ``eta0, sigma0`` alongside ``(alpha, A)`` because the clock offset
    ``beta`` is only fixed through ``A = eta0 sigma0^2 e^{2 beta}``.
    """

    tag: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in FAMILY_TAGS:
            raise ValueError(f"unknown family {self.tag!r}")
        names = _PARAMS[self.tag]
        if set(self.params) != set(names):
            raise ValueError(f"{self.tag} expects parameters {names}")
        clean = {}
        for k in names:
            v = float(self.params[k])
            if not math.isfinite(v):
                raise ValueError(f"{self.tag}: parameter {k} is not finite")
            if k in _SCALE and v <= 0:
                raise ValueError(f"{self.tag}: {k} must be positive")
            if k == "p" and v < 0:
                raise ValueError(f"{self.tag}: p must be nonnegative")
            clean[k] = v
        object.__setattr__(self, "params", clean)

    def __getattr__(self, name):
        params = self.__dict__.get("params", {})
        if name in params:
            return params[name]
        raise AttributeError(name)

    @property
    def trader_time(self) -> bool:
        return self.tag in TRADER_TIME_FAMILIES

    def rate_squared(self, lam: float) -> float:
        """Squared exponential rate of the hyperbolic part of the solution."""
        p = self.params
        if self.tag == "ConstantCoefficients":
            return lam * p["sigma0"] ** 2 / p["eta0"]
        if self.tag == "CoshFamily":
            return p["a"] ** 2 + lam * p["sigma0"] ** 2 / p["eta0"]
        if self.tag == "ExpFamily":
            return p["zeta0"] ** 2 / 4 + lam * p["sigma0"] ** 2 / p["eta0"]
        if self.tag == "ExpProductFamily":
            return p["alpha"] ** 2 / 4 + lam * p["sigma0"] ** 2 / p["eta0"]
        return p["p"]

    # convenience constructors
    @classmethod
    def constant(cls, eta0, sigma0):
        return cls("ConstantCoefficients", {"eta0": eta0, "sigma0": sigma0})

    @classmethod
    def cosh(cls, eta0, gamma, a, sigma0):
        return cls("CoshFamily", {"eta0": eta0, "gamma": gamma, "a": a, "sigma0": sigma0})

    @classmethod
    def exp(cls, eta0, sigma0, zeta0):
        return cls("ExpFamily", {"eta0": eta0, "sigma0": sigma0, "zeta0": zeta0})

    @classmethod
    def exp_product(cls, alpha, A, eta0, sigma0):
        return cls("ExpProductFamily", {"alpha": alpha, "A": A, "eta0": eta0, "sigma0": sigma0})

    @classmethod
    def const_product(cls, p):
        return cls("ConstProductFamily", {"p": p})

    @classmethod
    def quadratic_product(cls, p):
        return cls("QuadraticProductFamily", {"p": p})


# ---------------------------------------------------------------------------
# building blocks


def _sinh_ratio(nu, t0, T, s):
    """``sinh(nu (T-s)) / sinh(nu (T-t0))`` and its first derivative in ``s``.

    Returns the straight-line limit when ``nu^2`` is below the floor.
    The second derivative is always ``nu^2`` times the ratio.
    """
    span = T - t0
    if nu * nu < KAPPA2_FLOOR:
        return (T - s) / span, np.full_like(s, -1.0 / span), 0.0
    rest = T - s
    if nu * span > _LOG_SWITCH:
        denom = -np.expm1(-2 * nu * span)
        decay = np.exp(nu * (t0 - s))
        tail = np.exp(-2 * nu * rest)
        return decay * (1 - tail) / denom, -nu * decay * (1 + tail) / denom, nu * nu
    sh = np.sinh(nu * span)
    return np.sinh(nu * rest) / sh, -nu * np.cosh(nu * rest) / sh, nu * nu


def _nu_coth(nu, span):
    """``nu coth(nu span)`` with its ``1/span`` limit at ``nu -> 0``."""
    if nu * nu < KAPPA2_FLOOR:
        return 1.0 / span
    return nu / math.tanh(nu * span)


def _cosh_ratio(a, t, s):
    """``cosh(a t) / cosh(a s)`` without overflow."""
    at, as_ = abs(a * t), np.abs(a * s)
    return np.exp(at - as_) * (1 + math.exp(-2 * at)) / (1 + np.exp(-2 * as_))


def _gauss_tail(p, tauF):
    """Vectorised ``J(tau) = int_tau^tauF exp(-p z^2) dz`` by adaptive quadrature."""
    g = lambda z: np.exp(-p * z * z)

    def J(tau):
        tau = np.asarray(tau, dtype=float)
        flat = tau.ravel()
        nodes, inverse = np.unique(np.concatenate([flat, [tauF]]), return_inverse=True)
        cum = cumulative_integral(g, nodes, rtol=1e-13)
        return (cum[-1] - cum[inverse[:-1]]).reshape(tau.shape)

    return J


# ---------------------------------------------------------------------------
# per-family frames, trajectories and costs


def family_problem(family: SolvableFamily, t0: float, T: float, x0: float, lam: float) -> FrameProblem:
    """The cost functional a family is exact for, in the family's own time."""
    p = family.params
    tag = family.tag
    if tag == "ConstantCoefficients":
        e, r = p["eta0"], lam * p["sigma0"] ** 2
        return FrameProblem(t0, T, x0, lambda s: np.full_like(s, e), np.zeros_like,
                            lambda s: np.full_like(s, r), tag)
    if tag == "CoshFamily":
        e, g, a, sg = p["eta0"], p["gamma"], p["a"], p["sigma0"]
        return FrameProblem(
            t0, T, x0,
            lambda s: e * g * g * np.cosh(a * s) ** 2,
            lambda s: e * g * g * a * np.sinh(2 * a * s),
            lambda s: lam * (sg * g * np.cosh(a * s)) ** 2,
            tag,
        )
    if tag == "ExpFamily":
        e, sg, z = p["eta0"], p["sigma0"], p["zeta0"]
        return FrameProblem(
            t0, T, x0,
            lambda s: e * np.exp(z * s),
            lambda s: e * z * np.exp(z * s),
            lambda s: lam * sg * sg * np.exp(z * s),
            tag,
        )
    if tag == "ExpProductFamily":
        al, e, sg = p["alpha"], p["eta0"], p["sigma0"]
        eb = math.sqrt(p["A"] / (e * sg * sg))
        # trader-time impact eta/(ds/dtau) and risk weight lam sigma^2 ds/dtau
        return FrameProblem(
            t0, T, x0,
            lambda s: e * eb * np.exp(al * s),
            lambda s: e * eb * al * np.exp(al * s),
            lambda s: lam * sg * sg * eb * np.exp(al * s),
            tag,
        )
    pp = p["p"]
    if tag == "ConstProductFamily":
        return FrameProblem(t0, T, x0, np.ones_like, np.zeros_like, lambda s: np.full_like(s, pp), tag)
    return FrameProblem(t0, T, x0, np.ones_like, np.zeros_like, lambda s: pp * (1 + pp * s * s), tag)


def closed_form_cost(family: SolvableFamily, t0: float, T: float, x0: float, lam: float) -> float:
    """Optimal cost from the family's boundary formula."""
    p = family.params
    span = T - t0
    nu = math.sqrt(family.rate_squared(lam))
    tag = family.tag
    if tag == "ConstantCoefficients":
        return p["eta0"] * x0 * x0 * _nu_coth(nu, span)
    if tag == "CoshFamily":
        a = p["a"]
        return (p["eta0"] * p["gamma"] ** 2 * x0 * x0 * math.cosh(a * t0) ** 2
                * (_nu_coth(nu, span) + a * math.tanh(a * t0)))
    if tag == "ExpFamily":
        z = p["zeta0"]
        return p["eta0"] * x0 * x0 * math.exp(z * t0) * (_nu_coth(nu, span) + z / 2)
    if tag == "ExpProductFamily":
        al, e = p["alpha"], p["eta0"]
        eb = math.sqrt(p["A"] / (e * p["sigma0"] ** 2))
        return x0 * x0 * e * math.exp(al * t0) * eb * (al / 2 + _nu_coth(nu, span))
    if tag == "ConstProductFamily":
        return x0 * x0 * _nu_coth(nu, span)
    pp = p["p"]
    if pp < KAPPA2_FLOOR:
        return x0 * x0 / span
    J0 = gauss_kronrod(lambda z: np.exp(-pp * z * z), t0, T, rtol=1e-13, atol=0.0).value
    return x0 * x0 * (math.exp(-pp * t0 * t0) / J0 - pp * t0)


def exp_product_cost_as_printed(family: SolvableFamily, t0: float, T: float, x0: float, lam: float) -> float:
    """The exponential-product cost with the prefactor as it appears in print.

    It carries ``(x0^2/2)(alpha + mu coth(mu span))`` where the boundary
    evaluation gives ``x0^2 (alpha/2 + mu coth(mu span))``.  Kept only so the
    tests can show the two disagree; never used by a solver.
    """
    p = family.params
    mu = math.sqrt(family.rate_squared(lam))
    eb = math.sqrt(p["A"] / (p["eta0"] * p["sigma0"] ** 2))
    return 0.5 * x0 * x0 * p["eta0"] * math.exp(p["alpha"] * t0) * eb * (p["alpha"] + _nu_coth(mu, T - t0))


def _trajectory(family: SolvableFamily, t0: float, T: float, x0: float, lam: float) -> Trajectory:
    p = family.params
    tag = family.tag
    nu = math.sqrt(family.rate_squared(lam))

    if tag == "QuadraticProductFamily":
        return _gaussian_trajectory(p["p"], t0, T, x0)

    # x = x0 * P(s) * R(s), with R the hyperbolic ratio and P a prefactor
    if tag == "CoshFamily":
        a = p["a"]

        def prefactor(s):
            P = _cosh_ratio(a, t0, s)
            th = np.tanh(a * s)
            return P, -a * th * P, a * a * (th * th - 1 / np.cosh(a * s) ** 2) * P
    elif tag in ("ExpFamily", "ExpProductFamily"):
        half = (p["zeta0"] if tag == "ExpFamily" else p["alpha"]) / 2

        def prefactor(s):
            P = np.exp(-half * (s - t0))
            return P, -half * P, half * half * P
    else:
        def prefactor(s):
            one = np.ones_like(s)
            return one, 0.0 * one, 0.0 * one

    def value(s):
        P = prefactor(s)[0]
        return x0 * P * _sinh_ratio(nu, t0, T, s)[0]

    def derivative(s):
        P, dP, _ = prefactor(s)
        R, dR, _ = _sinh_ratio(nu, t0, T, s)
        return x0 * (dP * R + P * dR)

    def second(s):
        P, dP, d2P = prefactor(s)
        R, dR, nu2 = _sinh_ratio(nu, t0, T, s)
        return x0 * (d2P * R + 2 * dP * dR + P * nu2 * R)

    return Trajectory(t0, T, value, derivative, second, method=f"closed-form:{tag}",
                      family=tag, params=dict(p))


def _gaussian_trajectory(pp: float, t0: float, T: float, x0: float) -> Trajectory:
    tag = "QuadraticProductFamily"
    if pp < KAPPA2_FLOOR:
        span = T - t0
        return Trajectory(
            t0, T,
            lambda s: x0 * (T - s) / span,
            lambda s: np.full_like(s, -x0 / span),
            lambda s: np.zeros_like(s),
            method=f"closed-form:{tag}", family=tag, params={"p": pp},
        )
    J = _gauss_tail(pp, T)
    J0 = gauss_kronrod(lambda z: np.exp(-pp * z * z), t0, T, rtol=1e-13, atol=0.0).value

    def value(s):
        ratio = J(s) / J0
        ratio = np.where(s == t0, 1.0, ratio)
        return x0 * np.exp(0.5 * pp * (s * s - t0 * t0)) * ratio

    def derivative(s):
        return pp * s * value(s) - x0 * np.exp(-0.5 * pp * (s * s + t0 * t0)) / J0

    def second(s):
        tail = x0 * np.exp(-0.5 * pp * (s * s + t0 * t0)) / J0
        return pp * value(s) + pp * s * derivative(s) + pp * s * tail

    return Trajectory(t0, T, value, derivative, second, method=f"closed-form:{tag}",
                      family=tag, params={"p": pp})


def solve_closed_form(family: SolvableFamily, t0: float, T: float, x0: float, lam: float):
    """Exact optimal schedule and cost for ``family`` on ``[t0, T]``.

    For trader-time families ``[t0, T]`` is the trader-time span and the
    returned schedule is a function of trader time.  The cost report
    carries the boundary-formula total; the impact/risk split comes from
    quadrature and any mismatch is folded into ``abs_error_estimate``.
    """
    t0, T, x0, lam = float(t0), float(T), float(x0), float(lam)
    if not all(map(math.isfinite, (t0, T, x0, lam))):
        raise ValueError("non-finite argument")
    if not T > t0:
        raise ValueError("T must exceed t0")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    traj = _trajectory(family, t0, T, x0, lam)
    total = closed_form_cost(family, t0, T, x0, lam)
    split = evaluate_cost(family_problem(family, t0, T, x0, lam), traj)
    err = split.abs_error_estimate + abs(total - split.total)
    return traj, CostReport(float(total), split.impact_term, split.risk_term, traj.method, float(err))


# ---------------------------------------------------------------------------
# scenario matching


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-13, abs_tol=1e-300)


def _exp_view(c):
    if c.family == "Constant":
        return c.params["c0"], 0.0
    if c.family == "Exponential":
        return c.params["c0"], c.params["rate"]
    return None


def detect_family(scenario: Scenario) -> SolvableFamily | None:
    """Match the scenario's parametric coefficient tags to a solvable family.

    Matching is by exact parameter relations (up to rounding); tabulated
    coefficients are never matched.
    """
    eta, sigma, lam = scenario.eta, scenario.sigma, scenario.lam
    ev, sv = _exp_view(eta), _exp_view(sigma)
    if ev is not None and sv is not None:
        (ce, re), (cs, rs) = ev, sv
        if re == 0.0 and rs == 0.0:
            return SolvableFamily.constant(ce, cs)
        if _same(2 * rs, re):
            return SolvableFamily.exp(ce, cs, re)
        if _same(2 * rs, -re):
            return SolvableFamily.const_product(lam * cs * cs * ce)
        return None
    if eta.family == "CoshPower" and sigma.family == "CoshPower":
        pe, ps = eta.params, sigma.params
        if (pe["power"] == 2.0 and ps["power"] == 1.0
                and _same(pe["gamma"], ps["gamma"]) and pe["a"] == ps["a"]):
            return SolvableFamily.cosh(pe["c0"], pe["gamma"], pe["a"], ps["c0"])
        return None
    if eta.family == "Constant" and sigma.family == "QuadraticProduct" and lam > 0:
        e = eta.params["c0"]
        ps = sigma.params
        if ps["power"] == 0.5 and _same(ps["k"] * e, lam * ps["c0"] ** 2):
            return SolvableFamily.quadratic_product(lam * ps["c0"] ** 2 * e)
    return None


def solve_scenario_closed_form(scenario: Scenario, family: SolvableFamily | None = None):
    """Solve a physical-time scenario through its matching family.

    Trader-time families are mapped back to physical time analytically:
    the constant-product case through ``tau(s) = int ds / eta`` for an
    exponential impact, the Gaussian case through ``tau = s / eta0``.
    Returns ``(trajectory, cost_report, family)``; raises ``LookupError``
    if no family matches.
    """
    family = family or detect_family(scenario)
    if family is None:
        raise LookupError("scenario does not match a closed-form family")
    t0, T, x0, lam = scenario.t0, scenario.T, scenario.x0, scenario.lam
    if not family.trader_time:
        traj, _ = solve_closed_form(family, t0, T, x0, lam)
    elif family.tag == "QuadraticProductFamily":
        e = scenario.eta.params["c0"]
        inner, _ = solve_closed_form(family, t0 / e, T / e, x0, lam)
        traj = _affine_pullback(inner, t0, T, e)
    elif family.tag == "ConstProductFamily":
        ce, re = _exp_view(scenario.eta)
        traj = _exp_clock_pullback(family, scenario, ce, re)
    else:
        raise LookupError(f"{family.tag} has no physical-time embedding")
    total = closed_form_cost(family, *(_own_span(family, scenario)), x0, lam)
    split = evaluate_cost(scenario, traj)
    err = split.abs_error_estimate + abs(total - split.total)
    report = CostReport(float(total), split.impact_term, split.risk_term, traj.method, float(err))
    return traj, report, family


def _own_span(family, scenario):
    t0, T = scenario.t0, scenario.T
    if family.tag == "QuadraticProductFamily":
        e = scenario.eta.params["c0"]
        return t0 / e, T / e
    if family.tag == "ConstProductFamily":
        ce, re = _exp_view(scenario.eta)
        return 0.0, _exp_clock(ce, re, t0)(np.asarray(T))
    return t0, T


def _affine_pullback(inner: Trajectory, t0, T, scale) -> Trajectory:
    return Trajectory(
        t0, T,
        lambda s: inner._value(s / scale),
        lambda s: inner._derivative(s / scale) / scale,
        lambda s: inner._second(s / scale) / scale**2,
        method=inner.method, family=inner.family, params=dict(inner.params),
    )


def _exp_clock(ce, re, t0):
    """``tau(s) = int_{t0}^{s} du / (ce e^{re u})``."""
    if re == 0.0:
        return lambda s: (s - t0) / ce
    return lambda s: (math.exp(-re * t0) - np.exp(-re * s)) / (re * ce)


def _exp_clock_pullback(family, scenario, ce, re) -> Trajectory:
    t0, T = scenario.t0, scenario.T
    tau = _exp_clock(ce, re, t0)
    tauF = float(tau(np.asarray(T)))
    inner, _ = solve_closed_form(family, 0.0, tauF, scenario.x0, scenario.lam)
    eta = lambda s: ce * np.exp(re * s)

    def value(s):
        return np.where(s == T, 0.0, inner._value(tau(s)))

    def derivative(s):
        return inner._derivative(tau(s)) / eta(s)

    def second(s):
        e = eta(s)
        return inner._second(tau(s)) / e**2 - inner._derivative(tau(s)) * re / e

    return Trajectory(t0, T, value, derivative, second, method=inner.method,
                      family=inner.family, params=dict(inner.params))
