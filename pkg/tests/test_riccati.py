import math

import numpy as np
import pytest

from conftest import COSH_X_HALF, COTH1, GAUSS_COST, GAUSS_X_HALF, GRID, constant_scenario, cosh_scenario, rel, tabulated_scenario
from exactexec.closed_form import solve_scenario_closed_form
from exactexec.model import FrameProblem, el_residual, evaluate_cost
from exactexec.reparam import build_clock
from exactexec.riccati import (
    RiccatiBlowUp,
    coefficient_W,
    reconstruct,
    solve_riccati,
    solve_via_riccati,
)

one = lambda t: np.ones_like(np.asarray(t, dtype=float))
zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
quad = lambda t: 1.0 + np.asarray(t, dtype=float) ** 2


def test_unit_W_terminal():
    sol = solve_riccati(one, (0.0, 1.0))
    assert float(sol.F(0.0)) == pytest.approx(-math.tanh(1.0), abs=1e-10)
    assert np.max(np.abs(sol.F(GRID) + np.tanh(1 - GRID))) < 1e-9
    assert sol.residual() < 1e-6


def test_zero_W():
    sol = solve_riccati(zero, (0.0, 1.0))
    assert np.max(np.abs(sol.F(GRID))) == 0.0 and np.max(np.abs(sol.f(GRID))) == 0.0
    x, r = reconstruct(sol, 2.0)
    assert np.max(np.abs(x.value(GRID) - 2 * (1 - GRID))) < 1e-14
    assert r.total == pytest.approx(4.0, rel=1e-14)


def test_quadratic_W_initial_zero():
    sol = solve_riccati(quad, (0.0, 1.0), condition=("initial", 0.0))
    assert np.max(np.abs(sol.F(GRID) - GRID)) < 1e-9


def test_reconstruct_unit_W():
    x, r = reconstruct(solve_riccati(one, (0.0, 1.0)), 1.0)
    assert np.max(np.abs(x.value(GRID) - np.sinh(1 - GRID) / math.sinh(1))) < 1e-6
    assert rel(r.total, COTH1) < 1e-8


def test_reconstruct_gaussian():
    x, r = reconstruct(solve_riccati(quad, (0.0, 1.0)), 1.0)
    assert float(x.value(0.5)) == pytest.approx(GAUSS_X_HALF, rel=1e-8)
    assert rel(r.total, GAUSS_COST) < 1e-8


@pytest.mark.parametrize("W", [one, quad, lambda t: 4.0 + np.sin(3 * np.asarray(t))])
def test_representation_identity(W):
    sol = solve_riccati(W, (0.0, 1.0))
    x, r = reconstruct(sol, 1.0)
    problem = FrameProblem(0.0, 1.0, 1.0, one, zero, W, "W")
    # unit impact: residual is x'' - W x
    assert el_residual(problem, x, 1001)[0] < 1e-6
    assert rel(r.total, evaluate_cost(problem, x).total) < 1e-6


@pytest.mark.parametrize("c", [-0.5, 0.0, 0.3, 2.0])
def test_gauge_independence(c):
    a, _ = reconstruct(solve_riccati(one, (0.0, 1.0)), 1.0)
    b, _ = reconstruct(solve_riccati(one, (0.0, 1.0), condition=("initial", c)), 1.0)
    assert np.max(np.abs(a.value(GRID) - b.value(GRID))) < 1e-8


@pytest.mark.parametrize("W", [one, quad, lambda t: 9.0 * np.exp(-np.asarray(t))])
def test_terminal_zero_bounded(W):
    sol = solve_riccati(W, (0.0, 1.0))
    supW = float(np.max(W(GRID)))
    assert sol.blow_up is None
    assert np.all(sol.F_nodes <= 1e-15) and np.all(sol.F_nodes > -math.sqrt(supW))


def test_blow_up_flagged():
    sol = solve_riccati(one, (0.0, 5.0), condition=("initial", -3.0))
    assert sol.blow_up is not None
    with pytest.raises(RiccatiBlowUp):
        reconstruct(sol, 1.0)


class TestCoefficientW:
    def test_constant_tau_frame(self):
        sc = constant_scenario(lam=2.0, eta=3.0, sigma=0.5)
        W = coefficient_W(sc, "tau_frame")
        tau = np.linspace(*W.span, 11)
        assert np.allclose(W(tau), 2.0 * 0.25 * 3.0, rtol=1e-14)

    def test_cosh_u_frame(self):
        W = coefficient_W(cosh_scenario(), "u_frame_s")
        assert np.max(np.abs(W(GRID) - 2.0)) < 1e-12

    def test_no_risk(self):
        W = coefficient_W(cosh_scenario(lam=0.0), "tau_frame")
        assert np.all(W(np.linspace(*W.span, 11)) == 0.0)

    def test_wrong_clock(self):
        sc = cosh_scenario()
        with pytest.raises(ValueError):
            coefficient_W(sc, "tau_frame", clock=build_clock("AlmgrenChriss", sc))


@pytest.mark.parametrize("frame", ["tau_frame", "u_frame_s"])
def test_cosh_scenario_matches_closed_form(frame):
    sc = cosh_scenario()
    exact, rep, _ = solve_scenario_closed_form(sc)
    x, r, _, _ = solve_via_riccati(sc, frame)
    assert np.max(np.abs(x.value(GRID) - exact.value(GRID))) < 1e-5
    assert float(x.value(0.5)) == pytest.approx(COSH_X_HALF, rel=1e-7)
    assert rel(r.total, rep.total) < 1e-8


def test_tabulated_via_riccati_consistent():
    sc = tabulated_scenario()
    x, r, _, _ = solve_via_riccati(sc)
    assert rel(r.total, evaluate_cost(sc, x).total) < 1e-6
    assert el_residual(sc, x, 1001)[0] < 1e-5 * max(1.0, abs(sc.x0))
