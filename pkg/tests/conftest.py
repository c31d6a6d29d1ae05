"""
Shared fixtures: the two-name model used throughout the survival comparisons
"""
import math

import pytest
from scipy import integrate, stats

from models import ArrivalTimeModel, CopulaSpec
from numerics import RngStream

LAMBDAS = [0.02, 0.02]
RHO = 0.9


def gaussian_diagonal(p: float, rho: float) -> float:
    """
    C(p, p) of the bivariate Gaussian copula by Plackett's identity

    P(X <= x, Y <= x) = Phi(x)^2 + integral_0^rho phi2(x, x; r) dr, computed
    with scipy quadrature so it shares no code with numerics.
    """
    x = stats.norm.ppf(p)

    def density(r):
        return math.exp(-x * x / (1.0 + r)) / (2.0 * math.pi * math.sqrt(1.0 - r * r))

    correction, _ = integrate.quad(density, 0.0, rho, epsabs=1e-15, epsrel=1e-13)
    return stats.norm.cdf(x) ** 2 + correction


# Joint survival of the rho = 0.9 Gaussian model over 100 years
GAUSSIAN_ONE_SHOT = gaussian_diagonal(math.exp(-2.0), RHO)
GAUSSIAN_MULTI_STEP = gaussian_diagonal(math.exp(-0.02), RHO) ** 100
INDEPENDENT_SURVIVAL = math.exp(-4.0)
COMONOTONE_SURVIVAL = math.exp(-2.0)


def within_stderr(estimate, target: float, k: float = 3.0) -> bool:
    """True when an McEstimate lies within k standard errors of target"""
    return abs(estimate.mean - target) <= k * max(estimate.stderr, 1e-12)


@pytest.fixture
def rng():
    return RngStream(seed=42)


@pytest.fixture
def gaussian_model():
    return ArrivalTimeModel(lambdas=LAMBDAS, copula=CopulaSpec.gaussian(RHO))


@pytest.fixture
def gumbel_model():
    return ArrivalTimeModel(lambdas=LAMBDAS, copula=CopulaSpec.gumbel(2.0))
