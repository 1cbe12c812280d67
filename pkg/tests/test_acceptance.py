"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import (
    COSH_X_HALF,
    COTH1,
    ERMAKOV_UNIT,
    GAUSS_COST,
    GAUSS_X_HALF,
    GRID,
    constant_scenario,
    cosh_scenario,
    exp_scenario,
    rel,
    tabulated_scenario,
)
from exactexec.cli import main
from exactexec.closed_form import (
    SolvableFamily,
    detect_family,
    exp_product_cost_as_printed,
    family_problem,
    solve_closed_form,
    solve_scenario_closed_form,
)
from exactexec.invariants import ermakov_invariant, solve_pinney
from exactexec.model import el_residual, evaluate_cost
from exactexec.normal_form import boundary_cost
from exactexec.oracle import convergence_order, solve_discrete
from exactexec.reparam import build_clock, pull_back_trajectory, push_forward_trajectory, transform_scenario
from exactexec.riccati import coefficient_W, reconstruct, solve_riccati, solve_via_riccati
from exactexec.solvers import solve

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def report(n, ok, detail):
    print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_constant_reproduction():
    start = time.perf_counter()
    sc = constant_scenario()
    x, r, _ = solve_scenario_closed_form(sc)
    e_quad = rel(evaluate_cost(sc, x).total, r.total)
    e_bnd = rel(boundary_cost(x, sc).total, r.total)
    _, o = solve_discrete(sc, 4096)
    e_orc = rel(o.total, r.total)
    elapsed = time.perf_counter() - start
    ok = (rel(r.total, COTH1) < 1e-14 and e_quad < 1e-8 and e_bnd < 1e-7 and e_orc < 1e-5 and elapsed < 1.0)
    report(1, ok, f"quad {e_quad:.1e} boundary {e_bnd:.1e} oracle {e_orc:.1e} time {elapsed:.2f}s")


def test_criterion_02_cosh_and_exponential_families():
    start = time.perf_counter()
    worst = dict(res=0.0, bnd=0.0, quad=0.0, orc=0.0)
    for make in (cosh_scenario, exp_scenario):
        for p in (-1.0, 0.5, 2.0):
            for lam in (0.5, 1.0, 4.0):
                sc = make(p, lam=lam)
                fam = detect_family(sc)
                assert fam.tag == ("CoshFamily" if make is cosh_scenario else "ExpFamily")
                x, r = solve_closed_form(fam, sc.t0, sc.T, sc.x0, sc.lam)
                worst["res"] = max(worst["res"], el_residual(sc, x, 1001)[0])
                worst["bnd"] = max(worst["bnd"], abs(float(x.value(sc.t0)) - sc.x0) + abs(float(x.value(sc.T))))
                worst["quad"] = max(worst["quad"], rel(r.total, evaluate_cost(sc, x).total))
                worst["orc"] = max(worst["orc"], rel(solve_discrete(sc, 4096)[1].total, r.total))
    elapsed = time.perf_counter() - start
    ok = (worst["res"] < 1e-6 and worst["bnd"] == 0.0 and worst["quad"] < 1e-8 and worst["orc"] < 1e-5
          and elapsed < 30.0)
    report(2, ok, " ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" time {elapsed:.1f}s")


def test_criterion_03_exp_product_cost():
    worst, gaps = 0.0, []
    for alpha in (-1.0, 0.0, 1.0, 3.0):
        fam = SolvableFamily.exp_product(alpha, 2.0, 1.0, 1.0)
        x, r = solve_closed_form(fam, 0.0, 1.0, 1.0, 1.0)
        quad = evaluate_cost(family_problem(fam, 0.0, 1.0, 1.0, 1.0), x).total
        worst = max(worst, rel(r.total, quad))
        gaps.append(rel(exp_product_cost_as_printed(fam, 0.0, 1.0, 1.0, 1.0), quad))
    # alpha = 0 against the constant-product family with the same rate
    eta0, sigma0, A = 1.0, 1.0, 2.0
    zero = solve_closed_form(SolvableFamily.exp_product(0.0, A, eta0, sigma0), 0.0, 1.0, 1.0, 1.0)[1].total
    eb = math.sqrt(A / (eta0 * sigma0**2))
    cp = eta0 * eb * solve_closed_form(SolvableFamily.const_product(1.0), 0.0, 1.0, 1.0, 1.0)[1].total
    e_cp = rel(zero, cp)
    ok = worst < 1e-8 and e_cp < 1e-10
    report(3, ok, f"quad {worst:.1e} alpha=0 vs constant product {e_cp:.1e}; "
                  f"printed form misses quadrature by {min(gaps):.0%}..{max(gaps):.0%}")


def test_criterion_04_gaussian_family():
    fam = SolvableFamily.quadratic_product(1.0)
    x, r = solve_closed_form(fam, 0.0, 1.0, 1.0, 1.0)
    ox, o = solve_discrete(family_problem(fam, 0.0, 1.0, 1.0, 1.0), 4096)
    e_x = rel(float(x.value(0.5)), float(ox.value(0.5)))
    e_c = rel(r.total, o.total)
    ok = (e_x < 1e-5 and e_c < 1e-5 and rel(float(x.value(0.5)), GAUSS_X_HALF) < 1e-10
          and rel(r.total, GAUSS_COST) < 1e-10)
    report(4, ok, f"x(0.5) {float(x.value(0.5)):.6f} vs oracle {e_x:.1e}; cost {r.total:.6f} vs oracle {e_c:.1e}")


def test_criterion_05_riccati_equivalence():
    unit = lambda t: np.ones_like(np.asarray(t, dtype=float))
    x, _ = reconstruct(solve_riccati(unit, (0.0, 1.0)), 1.0)
    exact, _ = solve_closed_form(SolvableFamily.constant(1.0, 1.0), 0.0, 1.0, 1.0, 1.0)
    e_const = float(np.max(np.abs(x.value(GRID) - exact.value(GRID))))
    sc = cosh_scenario()
    y, _, _, W = solve_via_riccati(sc, "tau_frame")
    assert W.clock.kind == "SecondParameter"
    cf, _, _ = solve_scenario_closed_form(sc)
    e_cosh = float(np.max(np.abs(y.value(GRID) - cf.value(GRID))))
    ok = e_const < 1e-6 and e_cosh < 1e-5
    report(5, ok, f"constant W sup {e_const:.1e}; cosh via second clock sup {e_cosh:.1e}")


def test_criterion_06_reparametrisation_invariance():
    worst_cost, worst_trip = 0.0, 0.0
    for sc in (cosh_scenario(0.8, 2.0), tabulated_scenario()):
        x = solve(sc).trajectory
        s_cost = evaluate_cost(sc, x).total
        s = np.linspace(sc.t0, sc.T, 1001)
        for kind in ("AlmgrenChriss", "FirstParameter", "SecondParameter"):
            clock = build_clock(kind, sc)
            X = push_forward_trajectory(clock, x)
            tau_cost = evaluate_cost(transform_scenario(clock, sc), X).total
            worst_cost = max(worst_cost, rel(tau_cost, s_cost))
            worst_cost = max(worst_cost, rel(evaluate_cost(sc, pull_back_trajectory(clock, X)).total, s_cost))
            worst_trip = max(worst_trip, float(np.max(np.abs(clock.s_of_tau(clock.tau(s)) - s))) / sc.span)
    ok = worst_cost < 1e-6 and worst_trip < 1e-10
    report(6, ok, f"cost {worst_cost:.1e} round trip {worst_trip:.1e}")


def test_criterion_07_ermakov_invariant():
    const = lambda t: np.ones_like(np.asarray(t, dtype=float))
    quad = lambda t: 1.0 + np.asarray(t, dtype=float) ** 2
    cosh_W = coefficient_W(cosh_scenario(), "tau_frame")
    drifts = {}
    value = None
    for name, W, span in (("constant", const, (0.0, 1.0)), ("cosh", cosh_W, cosh_W.span),
                          ("quadratic", quad, (0.0, 1.0))):
        x, _ = reconstruct(solve_riccati(W, span), 1.0)
        samples, drifts[name] = ermakov_invariant(solve_pinney(W, span), x)
        if name == "constant":
            value = float(np.mean(samples[:, 1]))
    e_val = rel(value, ERMAKOV_UNIT)
    ok = max(drifts.values()) < 1e-6 and e_val < 1e-8
    report(7, ok, " ".join(f"{k} {v:.1e}" for k, v in drifts.items()) + f"; I vs 1/(2 sinh^2 1) {e_val:.1e}")


def test_criterion_08_oracle_convergence():
    orders = [convergence_order(sc, (64, 128, 256, 512)).order for sc in (constant_scenario(), cosh_scenario())]
    ok = all(abs(o - 2.0) <= 0.2 for o in orders)
    report(8, ok, "orders " + ", ".join(f"{o:.4f}" for o in orders))


def test_criterion_09_degenerate_limits():
    sc = constant_scenario(lam=0.0, x0=1.5, t0=0.5, T=2.0)
    s = np.linspace(0.5, 2.0, 1001)
    line = 1.5 * (2.0 - s) / 1.5
    paths = {m: solve(sc, m).trajectory for m in ("closed-form", "riccati", "oracle")}
    paths["riccati:u"] = solve_via_riccati(sc, "u_frame_s")[0]
    lin = max(float(np.max(np.abs(t.value(s) - line))) for t in paths.values())
    zero = constant_scenario(x0=0.0)
    zero_ok = True
    for m in ("closed-form", "riccati", "oracle"):
        r = solve(zero, m)
        zero_ok &= bool(np.all(r.trajectory.value(GRID) == 0.0)) and r.cost.total == 0.0
    r = solve_via_riccati(zero, "u_frame_s")
    zero_ok &= bool(np.all(r[0].value(GRID) == 0.0)) and r[1].total == 0.0
    ok = lin < 1e-8 and zero_ok
    report(9, ok, f"no-risk linear sup {lin:.1e}; zero inventory exact {zero_ok}")


def test_criterion_10_cli_contract(tmp_path):
    shipped = sorted(SCENARIOS.glob("*.json"))
    verify_codes = {p.name: main(["verify", "--scenario", str(p)]) for p in shipped}
    identical = True
    for p in shipped:
        outs = []
        for run in ("a", "b"):
            d = tmp_path / f"{p.stem}-{run}"
            d.mkdir()
            assert main(["solve", "--scenario", str(p), "--out", str(d / "x.csv"),
                         "--cost-out", str(d / "c.json")]) == 0
            assert main(["sweep", "--scenario", str(p), "--from", "0", "--to", "2", "--steps", "3",
                         "--out", str(d / "s.csv")]) == 0
            outs.append(d)
        for f in ("x.csv", "c.json", "s.csv"):
            identical &= filecmp.cmp(outs[0] / f, outs[1] / f, shallow=False)
    ok = identical and len(shipped) >= 5 and all(c == 0 for c in verify_codes.values())
    report(10, ok, f"byte-identical {identical}; verify exit codes {verify_codes}")
