"""Scenario files, trajectory CSV and cost JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .coefficients import CoefficientFunction
from .model import CostReport, Scenario, Trajectory

__all__ = [
    "ScenarioFileError",
    "parse_scenario",
    "load_scenario",
    "scenario_to_dict",
    "trajectory_csv",
    "cost_json",
    "OUTPUT_POINTS",
]

OUTPUT_POINTS = 513

_TOP = {"t0", "T", "x0", "lambda", "eta", "sigma", "frame"}
_REQUIRED_TOP = ("t0", "T", "x0", "lambda", "eta", "sigma")
_COEF_KEYS = {
    "Constant": ("c0",),
    "Exponential": ("c0", "rate"),
    "CoshPower": ("c0", "gamma", "a", "power"),
    "QuadraticProduct": ("c0", "k"),
    "Tabulated": ("knots", "values"),
}
_COEF_OPTIONAL = {"QuadraticProduct": ("power",)}


class ScenarioFileError(ValueError):
    """Invalid scenario document; the message starts with the offending key path."""


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFileError(f"{path}: expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise ScenarioFileError(f"{path}: must be finite")
    return float(value)


def _coefficient(obj, path):
    if not isinstance(obj, dict):
        raise ScenarioFileError(f"{path}: expected an object")
    if "family" not in obj:
        raise ScenarioFileError(f"{path}.family: missing key")
    family = obj["family"]
    if family not in _COEF_KEYS:
        raise ScenarioFileError(f"{path}.family: unknown family {family!r}")
    allowed = set(_COEF_KEYS[family]) | set(_COEF_OPTIONAL.get(family, ())) | {"family"}
    for key in obj:
        if key not in allowed:
            raise ScenarioFileError(f"{path}.{key}: unknown key for {family}")
    for key in _COEF_KEYS[family]:
        if key not in obj:
            raise ScenarioFileError(f"{path}.{key}: missing key")
    params = {}
    for key in allowed - {"family"}:
        if key not in obj:
            continue
        if family == "Tabulated":
            arr = obj[key]
            if not isinstance(arr, list):
                raise ScenarioFileError(f"{path}.{key}: expected an array")
            params[key] = [_number(v, f"{path}.{key}[{i}]") for i, v in enumerate(arr)]
        else:
            params[key] = _number(obj[key], f"{path}.{key}")
    if family == "Tabulated":
        for i, v in enumerate(params["values"]):
            if v <= 0:
                raise ScenarioFileError(f"{path}.values[{i}]: must be positive")
    try:
        return CoefficientFunction(family, params)
    except ValueError as exc:
        raise ScenarioFileError(f"{path}: {exc}") from None


def parse_scenario(doc) -> Scenario:
    """Validate a decoded scenario document and build the :class:`Scenario`."""
    if not isinstance(doc, dict):
        raise ScenarioFileError("$: expected a JSON object")
    for key in doc:
        if key not in _TOP:
            raise ScenarioFileError(f"{key}: unknown key")
    for key in _REQUIRED_TOP:
        if key not in doc:
            raise ScenarioFileError(f"{key}: missing key")
    t0 = _number(doc["t0"], "t0")
    T = _number(doc["T"], "T")
    x0 = _number(doc["x0"], "x0")
    lam = _number(doc["lambda"], "lambda")
    if not T > t0:
        raise ScenarioFileError("T: must exceed t0")
    if lam < 0:
        raise ScenarioFileError("lambda: must be nonnegative")
    frame = doc.get("frame", "physical")
    if frame not in ("physical", "trader"):
        raise ScenarioFileError("frame: must be 'physical' or 'trader'")
    eta = _coefficient(doc["eta"], "eta")
    sigma = _coefficient(doc["sigma"], "sigma")
    try:
        return Scenario(t0, T, x0, lam, eta, sigma, frame)
    except ValueError as exc:
        msg = str(exc)
        prefix = "" if msg.split(":")[0] in ("eta", "sigma") else "$: "
        raise ScenarioFileError(prefix + msg) from None


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"$: not valid JSON ({exc})") from None
    return parse_scenario(doc)


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "t0": scenario.t0,
        "T": scenario.T,
        "x0": scenario.x0,
        "lambda": scenario.lam,
        "eta": scenario.eta.to_dict(),
        "sigma": scenario.sigma.to_dict(),
        "frame": scenario.frame_label,
    }


def _fmt(v) -> str:
    return repr(float(v))


def trajectory_csv(trajectory: Trajectory, points: int = OUTPUT_POINTS) -> str:
    """CSV text with header ``s,x,dxds`` on a uniform grid of ``points`` rows."""
    s, x, dx = trajectory.sample(points)
    rows = ["s,x,dxds"]
    rows.extend(f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in zip(s, np.atleast_1d(x), np.atleast_1d(dx)))
    return "\n".join(rows) + "\n"


def cost_json(report: CostReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"
