import math

import numpy as np
import pytest

from conftest import GRID, const_product_scenario, constant_scenario, cosh_scenario, exp_scenario, rel, tabulated_scenario
from exactexec.closed_form import SolvableFamily, solve_closed_form, solve_scenario_closed_form
from exactexec.coefficients import CoefficientFunction as CF
from exactexec.model import Scenario, el_residual, evaluate_cost
from exactexec.reparam import (
    build_clock,
    pull_back_trajectory,
    push_forward_trajectory,
    transform_scenario,
)

KINDS = ("Identity", "AlmgrenChriss", "FirstParameter", "SecondParameter")
SMOKE = [cosh_scenario(0.8, 2.0), tabulated_scenario()]


def test_unit_volatility_ac_clock():
    c = build_clock("AlmgrenChriss", constant_scenario(t0=0.5, T=2.0))
    s = np.linspace(0.5, 2.0, 101)
    assert np.max(np.abs(c.tau(s) - (s - 0.5))) < 1e-14


def test_exponential_variance_ac_clock():
    sc = Scenario(0.0, 1.0, 1.0, 1.0, CF.constant(1.0), CF.exponential(1.0, 0.5))
    c = build_clock("AlmgrenChriss", sc)
    assert np.max(np.abs(c.tau(GRID) - np.expm1(GRID))) < 1e-12


def test_constant_impact_second_clock():
    c = build_clock("SecondParameter", constant_scenario(eta=2.0))
    assert np.max(np.abs(c.tau(GRID) - GRID / 2)) < 1e-15


def test_non_positive_rate_rejected():
    # Scenario refuses a vanishing sigma, so hand the clock a bare namespace
    from types import SimpleNamespace
    sc = SimpleNamespace(t0=0.0, T=1.0, eta=CF.constant(1.0), sigma=CF.quadratic(1.0, -1.0))
    with pytest.raises(ValueError, match="s=1.0"):
        build_clock("AlmgrenChriss", sc)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("sc", SMOKE + [exp_scenario(-1.0)])
def test_round_trip_and_monotone(kind, sc):
    c = build_clock(kind, sc)
    s = np.linspace(sc.t0, sc.T, 1001)
    assert np.max(np.abs(c.s_of_tau(c.tau(s)) - s)) < 1e-10 * sc.span
    assert np.all(np.diff(c.tau(s)) > 0)
    assert float(c.tau(sc.t0)) == 0.0


@pytest.mark.parametrize("sc", SMOKE)
def test_clock_rates(sc):
    s = np.linspace(sc.t0, sc.T, 257)
    ac = build_clock("AlmgrenChriss", sc)
    second = build_clock("SecondParameter", sc)
    first = build_clock("FirstParameter", sc)
    assert np.max(np.abs(ac.rate(s) - sc.sigma.value(s) ** 2)) < 1e-12
    assert np.max(np.abs(second.rate(s) * sc.eta.value(s) - 1.0)) < 1e-12
    # first-parameter rate is sigma/sqrt(eta) normalised to one at t0
    e0, s0 = float(sc.eta.value(sc.t0)), float(sc.sigma.value(sc.t0))
    ratio = first.rate(s) * np.sqrt(sc.eta.value(s)) / sc.sigma.value(s)
    assert np.max(np.abs(ratio - math.sqrt(e0) / s0)) < 1e-12


def test_identity_transform_unchanged():
    sc = cosh_scenario()
    eff = transform_scenario(build_clock("Identity", sc), sc)
    s = np.linspace(0, 1, 101)
    assert np.max(np.abs(eff.impact(s) - sc.impact(s))) < 1e-12
    assert np.max(np.abs(eff.risk_weight(s) - sc.risk_weight(s))) < 1e-12


def test_ac_transform_constant():
    sc = Scenario(0, 1, 1, 3.0, CF.constant(1.0), CF.constant(math.sqrt(2.0)))
    eff = transform_scenario(build_clock("AlmgrenChriss", sc), sc)
    tau = np.linspace(0, eff.T, 11)
    assert np.allclose(eff.eta_eff(tau), 2.0, rtol=1e-14)
    assert np.allclose(eff.risk_weight(tau), 3.0, rtol=1e-14)


@pytest.mark.parametrize("sc", SMOKE)
def test_second_clock_unit_impact(sc):
    eff = transform_scenario(build_clock("SecondParameter", sc), sc)
    tau = np.linspace(0, eff.T, 101)
    s = eff.clock.s_of_tau(tau)
    assert np.max(np.abs(eff.eta_eff(tau) - 1.0)) < 1e-12
    expected = sc.lam * sc.sigma.value(s) ** 2 * sc.eta.value(s)
    assert np.max(np.abs(eff.risk_weight(tau) - expected)) < 1e-12


def test_identity_pull_back_unchanged():
    sc = cosh_scenario()
    x, _, _ = solve_scenario_closed_form(sc)
    y = pull_back_trajectory(build_clock("Identity", sc), x)
    assert np.max(np.abs(y.value(GRID) - x.value(GRID))) < 1e-14


def test_const_product_pulled_back_is_on_shell():
    sc = const_product_scenario(1.0, 2.0)
    clock = build_clock("SecondParameter", sc)
    p = sc.lam * 1.0 * 1.0  # lam sigma^2 eta is constant for this scenario
    X, _ = solve_closed_form(SolvableFamily.const_product(p), 0.0, clock.tauF, sc.x0, sc.lam)
    assert el_residual(sc, pull_back_trajectory(clock, X), 1001)[0] < 1e-5


def test_span_mismatch_rejected():
    sc = cosh_scenario()
    X, _ = solve_closed_form(SolvableFamily.const_product(1.0), 0.0, 5.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        pull_back_trajectory(build_clock("SecondParameter", sc), X)


@pytest.mark.parametrize("kind", KINDS[1:])
@pytest.mark.parametrize("sc", SMOKE)
def test_cost_invariance(kind, sc):
    from exactexec.solvers import solve
    x = solve(sc).trajectory
    clock = build_clock(kind, sc)
    X = push_forward_trajectory(clock, x)
    tau_cost = evaluate_cost(transform_scenario(clock, sc), X).total
    assert rel(tau_cost, evaluate_cost(sc, x).total) < 1e-6
    back = pull_back_trajectory(clock, X)
    assert rel(evaluate_cost(sc, back).total, tau_cost) < 1e-6
