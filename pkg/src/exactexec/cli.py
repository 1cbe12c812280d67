"""``exactexec`` command line: solve, verify, sweep.

Exit codes: 0 success, 1 failed check or non-monotone sweep,
2 usage or scenario parse error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .io import ScenarioFileError, cost_json, load_scenario, trajectory_csv
from .model import SolverError
from .solvers import METHODS, solve
from .verify import format_table, run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

# round-off allowance when asserting monotone sweep totals
SWEEP_SLACK = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write(path, text):
    # newline="" keeps output bytes identical across platforms
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _load(path):
    try:
        return load_scenario(path)
    except OSError as exc:
        raise ScenarioFileError(f"{path}: {exc.strerror}") from None


def cmd_solve(args) -> int:
    scenario = _load(args.scenario)
    if args.grid < 2:
        raise ScenarioFileError("--grid: must be at least 2")
    try:
        result = solve(scenario, args.method, args.grid)
    except (SolverError, ValueError, ArithmeticError) as exc:
        print(f"solver failure ({args.method}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(args.out, trajectory_csv(result.trajectory))
    _write(args.cost_out, cost_json(result.cost))
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _load(args.scenario)
    try:
        checks = run_checks(scenario, args.tol)
    except (SolverError, ValueError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(format_table(checks, header=f"scenario {args.scenario}"))
    ok = all(c.passed for c in checks)
    print("all checks passed" if ok else "CHECK FAILURE")
    return EXIT_OK if ok else EXIT_CHECK


def _sweep_row(scenario, lam):
    cost = solve(scenario.replace(lam=float(lam))).cost
    return cost


def cmd_sweep(args) -> int:
    if args.param != "lambda":
        raise ScenarioFileError(f"--param: only 'lambda' can be swept, got {args.param!r}")
    if args.steps < 2:
        raise ScenarioFileError("--steps: must be at least 2")
    if not (np.isfinite(args.start) and np.isfinite(args.stop)) or args.start > args.stop:
        raise ScenarioFileError("--from/--to: need finite A <= B")
    if args.start < 0:
        raise ScenarioFileError("--from: lambda must be nonnegative")
    scenario = _load(args.scenario)
    lams = np.linspace(args.start, args.stop, args.steps)
    try:
        costs = [_sweep_row(scenario, lam) for lam in lams]
    except (SolverError, ValueError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    rows = ["lambda,total,impact_term,risk_term"]
    for lam, c in zip(lams, costs):
        rows.append(",".join(repr(float(v)) for v in (lam, c.total, c.impact_term, c.risk_term)))
    _write(args.out, "\n".join(rows) + "\n")
    totals = [c.total for c in costs]
    for i in range(1, len(totals)):
        if totals[i] < totals[i - 1] - SWEEP_SLACK * max(1.0, abs(totals[i - 1])):
            print(f"sweep totals decrease between lambda={lams[i - 1]!r} and lambda={lams[i]!r}; "
                  "this indicates a solver bug", file=sys.stderr)
            return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="exactexec", description="Optimal liquidation schedules with time-varying impact and volatility.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a scenario and write trajectory CSV and cost JSON")
    s.add_argument("--scenario", required=True, type=Path)
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--cost-out", required=True, type=Path)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run the check battery on a scenario")
    v.add_argument("--scenario", required=True, type=Path)
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="sweep risk aversion and tabulate the optimal cost")
    w.add_argument("--scenario", required=True, type=Path)
    w.add_argument("--param", default="lambda")
    w.add_argument("--from", dest="start", type=float, required=True)
    w.add_argument("--to", dest="stop", type=float, required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--out", required=True, type=Path)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ScenarioFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
