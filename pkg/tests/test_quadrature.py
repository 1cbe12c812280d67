import math

import numpy as np
import pytest

from exactexec.interp import MonotoneCubic, fd_slopes
from exactexec.quadrature import QuadratureError, cumulative_integral, gauss_kronrod


def test_polynomial_exact():
    r = gauss_kronrod(lambda s: 3 * s**2, 0.0, 2.0)
    assert r.value == pytest.approx(8.0, rel=1e-14)


def test_smooth_integrand():
    r = gauss_kronrod(np.exp, 0.0, 1.0)
    assert abs(r.value - (math.e - 1)) < 1e-13
    assert r.abs_error < 1e-10


def test_kink_with_breakpoint():
    f = lambda s: np.abs(s - 0.3)
    r = gauss_kronrod(f, 0.0, 1.0, breakpoints=[0.3])
    assert r.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-14)


def test_non_convergence_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        gauss_kronrod(lambda s: 1 / np.sqrt(np.abs(s - 0.5) + 1e-300), 0.0, 1.0, max_levels=3)
    assert math.isfinite(info.value.value)


def test_cumulative_integral():
    nodes = np.linspace(0, 2, 9)
    c = cumulative_integral(np.cos, nodes)
    assert c[0] == 0.0
    assert np.max(np.abs(c - np.sin(nodes))) < 1e-13


def test_monotone_cubic_preserves_shape():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    y = np.array([1.0, 1.0, 5.0, 5.1, 5.2])
    m = MonotoneCubic(x, y)
    s = np.linspace(0, 4, 2001)
    v = m(s)
    assert np.all(np.diff(v) >= -1e-14)
    assert np.array_equal(m(x), y)


def test_monotone_cubic_positive_between_positive_knots():
    x = np.linspace(0, 1, 6)
    y = np.array([1.0, 0.01, 2.0, 0.02, 3.0, 0.05])
    s = np.linspace(0, 1, 5001)
    assert np.all(MonotoneCubic(x, y)(s) > 0)


def test_fd_slopes_fourth_order():
    h = 0.01
    x = np.arange(0, 1 + h / 2, h)
    err = np.max(np.abs(fd_slopes(np.sin(x), h) - np.cos(x)))
    assert err < 1e-7
