"""Shape-preserving piecewise-cubic Hermite interpolation."""

from __future__ import annotations

import numpy as np

__all__ = ["MonotoneCubic", "fd_slopes"]


def _three_point_slopes(x, y):
    h = np.diff(x)
    d = np.diff(y) / h
    m = np.empty_like(y)
    # non-uniform three-point (second-order) derivative at interior nodes
    m[1:-1] = (h[1:] * d[:-1] + h[:-1] * d[1:]) / (h[:-1] + h[1:])
    m[0] = ((2 * h[0] + h[1]) * d[0] - h[0] * d[1]) / (h[0] + h[1])
    m[-1] = ((2 * h[-1] + h[-2]) * d[-1] - h[-1] * d[-2]) / (h[-1] + h[-2])
    return m


def fd_slopes(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative of samples on a uniform grid."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 5:
        return _three_point_slopes(np.arange(n) * h, y)
    m = np.empty(n)
    m[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    m[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    m[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    m[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    m[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return m


class MonotoneCubic:
    """Cubic Hermite interpolant with Fritsch-Carlson slope limiting.

    Node slopes default to a second-order three-point estimate; callers
    with better derivative information pass ``slopes``.  Either way the
    limiter zeroes slopes at local extrema of the data and caps them
    inside monotone runs, so the interpolant never leaves the range of
    its neighbouring samples.  Positive data therefore stay positive.
    """

    def __init__(self, x, y, slopes=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if len(x) < 2:
            raise ValueError("need at least two nodes")
        if np.any(np.diff(x) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if slopes is None:
            if len(x) == 2:
                slopes = np.full(2, (y[1] - y[0]) / (x[1] - x[0]))
            else:
                slopes = _three_point_slopes(x, y)
        self.x = x
        self.y = y
        self.m = self._limit(x, y, np.array(slopes, dtype=float))

    @staticmethod
    def _limit(x, y, m):
        d = np.diff(y) / np.diff(x)
        # extrema of the data: flat tangent
        flat = np.zeros(len(y), dtype=bool)
        flat[1:-1] = d[:-1] * d[1:] <= 0
        m[flat] = 0.0
        for i, di in enumerate(d):
            if di == 0.0:
                m[i] = m[i + 1] = 0.0
                continue
            alpha, beta = m[i] / di, m[i + 1] / di
            if alpha < 0:
                m[i] = alpha = 0.0
            if beta < 0:
                m[i + 1] = beta = 0.0
            r2 = alpha * alpha + beta * beta
            if r2 > 9.0:
                tau = 3.0 / np.sqrt(r2)
                m[i] = tau * alpha * di
                m[i + 1] = tau * beta * di
        return m

    def __call__(self, s, nu: int = 0):
        s = np.asarray(s, dtype=float)
        x, y, m = self.x, self.y, self.m
        # minimum/maximum: np.clip carries heavy per-call overhead on scalars
        i = np.minimum(np.maximum(np.searchsorted(x, s, side="right") - 1, 0), len(x) - 2)
        h = x[i + 1] - x[i]
        t = (s - x[i]) / h
        y0, y1, m0, m1 = y[i], y[i + 1], m[i] * h, m[i + 1] * h
        if nu == 0:
            t2 = t * t
            t3 = t2 * t
            return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0
                    + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1)
        if nu == 1:
            t2 = t * t
            return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0
                    + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h
        if nu == 2:
            return ((12 * t - 6) * y0 + (6 * t - 4) * m0
                    + (-12 * t + 6) * y1 + (6 * t - 2) * m1) / (h * h)
        raise ValueError("nu must be 0, 1 or 2")
