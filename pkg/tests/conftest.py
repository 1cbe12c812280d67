import math

import numpy as np
import pytest

from exactexec.coefficients import CoefficientFunction as CF
from exactexec.model import Scenario

# reference values, evaluated at 30 digits with mpmath and frozen
COTH1 = 1.3130352854993313036
SINH_HALF_RATIO = 0.44340944198503695433      # sinh(0.5)/sinh(1)
COSH_X_HALF = 0.35174703590707014911          # sinh(sqrt2/2)/(sinh(sqrt2) cosh(0.5))
COSH_COST = 1.5918916555204873645             # sqrt2 coth(sqrt2)
EXP_COST = 2.5918916555204873645              # sqrt2 coth(sqrt2) + 1
GAUSS_X_HALF = 0.43325160201388064606
GAUSS_COST = 1.3390033289820869211
ERMAKOV_UNIT = 0.36203083048315523320         # 1/(2 sinh^2 1)

GRID = np.linspace(0.0, 1.0, 1001)


def rel(a, b):
    return abs(a - b) / abs(b)


def constant_scenario(lam=1.0, x0=1.0, t0=0.0, T=1.0, eta=1.0, sigma=1.0):
    return Scenario(t0, T, x0, lam, CF.constant(eta), CF.constant(sigma))


def cosh_scenario(a=1.0, lam=1.0, x0=1.0, gamma=1.0, eta0=1.0, sigma0=1.0, t0=0.0, T=1.0):
    return Scenario(t0, T, x0, lam, CF.cosh_power(eta0, gamma, a, 2), CF.cosh_power(sigma0, gamma, a, 1))


def exp_scenario(zeta0=2.0, lam=1.0, x0=1.0, eta0=1.0, sigma0=1.0, t0=0.0, T=1.0):
    return Scenario(t0, T, x0, lam, CF.exponential(eta0, zeta0), CF.exponential(sigma0, zeta0 / 2))


def const_product_scenario(rate=1.0, lam=1.0, x0=1.0):
    return Scenario(0.0, 1.0, x0, lam, CF.exponential(1.0, rate), CF.exponential(1.0, -rate / 2))


def gaussian_scenario(p=1.0, x0=1.0):
    # unit impact, lam = 1, sigma^2 = p (1 + p s^2)
    return Scenario(0.0, 1.0, x0, 1.0, CF.constant(1.0), CF.quadratic(math.sqrt(p), p, 0.5))


def tabulated_scenario(x0=2.0, lam=2.0):
    knots = [0.0, 0.25, 0.5, 0.75, 1.0]
    return Scenario(0.0, 1.0, x0, lam, CF.tabulated(knots, [1.0, 1.3, 1.1, 0.8, 0.9]),
                    CF.tabulated(knots, [0.5, 0.6, 0.8, 0.7, 0.6]))


@pytest.fixture
def constant():
    return constant_scenario()


@pytest.fixture
def cosh():
    return cosh_scenario()
