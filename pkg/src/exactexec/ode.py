"""Piecewise initial-value integration around known kinks of the right-hand side."""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
from scipy.integrate import solve_ivp

__all__ = ["integrate_piecewise"]


def integrate_piecewise(rhs, t_span, y0, breakpoints=None, events=None, **options):
    """``solve_ivp`` restarted at every breakpoint strictly inside ``t_span``.

    Runge-Kutta steps that straddle a jump in a derivative of the
    right-hand side lose their order, and so does any Hermite dense output
    built on them.  Restarting at the breakpoints keeps every step smooth.
    ``t_span`` may run backward.  The result mimics the ``solve_ivp``
    fields ``t``, ``y``, ``status``, ``message`` and ``t_events``; shared
    segment endpoints appear once.
    """
    a, b = map(float, t_span)
    pts = np.asarray([] if breakpoints is None else breakpoints, dtype=float)
    lo, hi = min(a, b), max(a, b)
    pts = np.unique(pts[(pts > lo) & (pts < hi)])
    if b < a:
        pts = pts[::-1]
    edges = [a, *pts.tolist(), b]
    ts, ys = [np.array([a])], [np.asarray(y0, dtype=float)[:, None]]
    y = np.asarray(y0, dtype=float)
    n_events = 0 if events is None else (len(events) if isinstance(events, (list, tuple)) else 1)
    hit = [np.empty(0) for _ in range(n_events)]
    status, message = 0, "The solver successfully reached the end of the integration interval."
    for t0, t1 in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (t0, t1), y, events=events, **options)
        ts.append(sol.t[1:])
        ys.append(sol.y[:, 1:])
        if sol.t_events is not None:
            hit = [np.concatenate([h, e]) for h, e in zip(hit, sol.t_events)]
        status, message = sol.status, sol.message
        if sol.status != 0:
            break
        y = sol.y[:, -1]
    return SimpleNamespace(t=np.concatenate(ts), y=np.concatenate(ys, axis=1), status=status,
                           message=message, t_events=hit)
