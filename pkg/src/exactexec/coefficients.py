"""Positive time-dependent model coefficients (impact and volatility)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .interp import MonotoneCubic

__all__ = ["CoefficientFunction", "FAMILIES"]

FAMILIES = ("Constant", "Exponential", "CoshPower", "QuadraticProduct", "Tabulated")

_REQUIRED = {
    "Constant": ("c0",),
    "Exponential": ("c0", "rate"),
    "CoshPower": ("c0", "gamma", "a", "power"),
    "QuadraticProduct": ("c0", "k"),
    "Tabulated": ("knots", "values"),
}
_OPTIONAL = {"QuadraticProduct": {"power": 1.0}}


@dataclass(frozen=True)
class CoefficientFunction:
    """A strictly positive coefficient with analytic or interpolated derivatives.

    Families and their meaning:

    ``Constant``          ``c0``
    ``Exponential``       ``c0 * exp(rate * s)``
    ``CoshPower``         ``c0 * (gamma * cosh(a * s)) ** power`` with power 1 or 2
    ``QuadraticProduct``  ``c0 * (1 + k * s**2) ** power`` (power defaults to 1)
    ``Tabulated``         monotone cubic through ``(knots, values)``

    Use the classmethod constructors rather than building ``params`` by hand.
    """

    family: str
    params: Mapping[str, Any]
    _interp: MonotoneCubic | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown coefficient family {self.family!r}")
        params = dict(_OPTIONAL.get(self.family, {}))
        params.update(self.params)
        missing = [k for k in _REQUIRED[self.family] if k not in params]
        if missing:
            raise ValueError(f"{self.family}: missing parameter(s) {', '.join(missing)}")
        extra = set(params) - set(_REQUIRED[self.family]) - set(_OPTIONAL.get(self.family, {}))
        if extra:
            raise ValueError(f"{self.family}: unknown parameter(s) {', '.join(sorted(extra))}")

        if self.family == "Tabulated":
            knots = np.asarray(params["knots"], dtype=float)
            values = np.asarray(params["values"], dtype=float)
            if knots.ndim != 1 or knots.shape != values.shape:
                raise ValueError("Tabulated: knots and values must be equal-length lists")
            if len(knots) < 4:
                raise ValueError("Tabulated: at least 4 knots required")
            if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
                raise ValueError("Tabulated: non-finite entry")
            if np.any(np.diff(knots) <= 0):
                raise ValueError("Tabulated: knots must be strictly increasing")
            bad = np.flatnonzero(values <= 0)
            if bad.size:
                raise ValueError(f"Tabulated: values[{bad[0]}] = {values[bad[0]]} is not positive")
            params["knots"] = tuple(knots)
            params["values"] = tuple(values)
            interp = MonotoneCubic(knots, values)
            grid = np.linspace(knots[0], knots[-1], 1024)
            if np.any(interp(grid) <= 0):
                raise ValueError("Tabulated: interpolant is not positive on its span")
            object.__setattr__(self, "_interp", interp)
        else:
            for k, v in params.items():
                params[k] = float(v)
                if not np.isfinite(params[k]):
                    raise ValueError(f"{self.family}: parameter {k} is not finite")
            if params["c0"] <= 0:
                raise ValueError(f"{self.family}: c0 must be positive")
            if self.family == "CoshPower":
                if params["power"] not in (1.0, 2.0):
                    raise ValueError("CoshPower: power must be 1 or 2")
                if params["gamma"] <= 0:
                    raise ValueError("CoshPower: gamma must be positive")
            if self.family == "QuadraticProduct" and params["power"] not in (0.5, 1.0):
                raise ValueError("QuadraticProduct: power must be 0.5 or 1")
        object.__setattr__(self, "params", params)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c0):
        return cls("Constant", {"c0": c0})

    @classmethod
    def exponential(cls, c0, rate):
        return cls("Exponential", {"c0": c0, "rate": rate})

    @classmethod
    def cosh_power(cls, c0, gamma, a, power):
        return cls("CoshPower", {"c0": c0, "gamma": gamma, "a": a, "power": power})

    @classmethod
    def quadratic(cls, c0, k, power=1.0):
        return cls("QuadraticProduct", {"c0": c0, "k": k, "power": power})

    @classmethod
    def tabulated(cls, knots, values):
        return cls("Tabulated", {"knots": knots, "values": values})

    # -- evaluation -------------------------------------------------------
    @property
    def is_tabulated(self) -> bool:
        return self.family == "Tabulated"

    def domain(self) -> tuple[float, float]:
        if self.is_tabulated:
            return self.params["knots"][0], self.params["knots"][-1]
        return -np.inf, np.inf

    def __call__(self, s, nu: int = 0):
        return self.value(s) if nu == 0 else self.derivative(s, nu)

    def value(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order: int = 1):
        """``order``-th derivative (0, 1 or 2) at ``s``."""
        s = np.asarray(s, dtype=float)
        p = self.params
        fam = self.family
        if fam == "Tabulated":
            return self._interp(s, order)
        if fam == "Constant":
            return np.full_like(s, p["c0"]) if order == 0 else np.zeros_like(s)
        if fam == "Exponential":
            r = p["rate"]
            return p["c0"] * r**order * np.exp(r * s)
        if fam == "CoshPower":
            c, g, a = p["c0"], p["gamma"], p["a"]
            if p["power"] == 1.0:
                if order == 1:
                    return c * g * a * np.sinh(a * s)
                return c * g * a**order * np.cosh(a * s)
            scale = c * g * g
            if order == 0:
                return scale * np.cosh(a * s) ** 2
            if order == 1:
                return scale * a * np.sinh(2 * a * s)
            return scale * 2 * a * a * np.cosh(2 * a * s)
        # QuadraticProduct
        c, k, q = p["c0"], p["k"], p["power"]
        base = 1.0 + k * s * s
        if order == 0:
            return c * base**q
        if order == 1:
            return c * q * base ** (q - 1) * 2 * k * s
        return c * q * ((q - 1) * base ** (q - 2) * (2 * k * s) ** 2 + base ** (q - 1) * 2 * k)

    def check_positive(self, t0: float, T: float, name: str = "coefficient") -> None:
        """Raise ``ValueError`` unless the coefficient is defined and positive on ``[t0, T]``."""
        lo, hi = self.domain()
        if t0 < lo or T > hi:
            raise ValueError(f"{name}: tabulated knots [{lo}, {hi}] do not cover [{t0}, {T}]")
        if self.family == "QuadraticProduct":
            smax = max(t0 * t0, T * T)
            smin = 0.0 if t0 <= 0.0 <= T else min(t0 * t0, T * T)
            k = self.params["k"]
            if 1.0 + k * (smax if k < 0 else smin) <= 0:
                raise ValueError(f"{name}: 1 + k*s^2 vanishes on [{t0}, {T}]")
        if self.is_tabulated:
            grid = np.linspace(t0, T, 1024)
            vals = self.value(grid)
            bad = np.flatnonzero(vals <= 0)
            if bad.size:
                raise ValueError(f"{name}: not positive at s={grid[bad[0]]}")

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for k, v in self.params.items():
            out[k] = list(v) if isinstance(v, tuple) else v
        return out
