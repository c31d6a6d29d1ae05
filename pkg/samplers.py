"""
Exact samplers for the supported copula families and the map to arrival times
"""
import logging
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from errors import DimensionError, DomainError, NumericalError
from models import CopulaFamily, CopulaSpec
from numerics import RngStream, std_normal_cdf
from utils import samples_csv, write_output

logger = logging.getLogger(__name__)

# theta in [1, 1 + THETA_INDEPENDENCE_TOL] is sampled as independence
THETA_INDEPENDENCE_TOL = 1e-9

_U_MIN = np.finfo(float).tiny
_U_MAX = 1.0 - 2.0 ** -53


def _open_unit(u: np.ndarray) -> np.ndarray:
    """Keep samples strictly inside (0, 1) after floating-point rounding"""
    return np.clip(u, _U_MIN, _U_MAX)


def _rows(size: Optional[int]) -> int:
    if size is None:
        return 1
    if size < 1:
        raise DomainError("sample size must be positive")
    return size


def _log_positive_stable(alpha: float, rng: RngStream, m: int) -> np.ndarray:
    """
    log S for S positive stable with Laplace transform exp(-z^alpha)

    Kanter's representation: one uniform angle V on (0, pi) and one unit
    exponential W per draw,
        S = sin(alpha V) / sin(V)^(1/alpha) * (sin((1 - alpha) V) / W)^((1 - alpha) / alpha)
    evaluated in log space so small alpha does not underflow.
    """
    v = np.pi * rng.uniform(m)
    w = rng.exponential(m)
    return (
        np.log(np.sin(alpha * v))
        - np.log(np.sin(v)) / alpha
        + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * v)) - np.log(w))
    )


def sample_positive_stable(alpha: float, rng: RngStream, size: Optional[int] = None):
    """
    Draw positive strictly stable variates with E[exp(-zS)] = exp(-z^alpha)

    Args:
        alpha: Stability index in (0, 1)
        rng: Random stream
        size: Number of draws; None for a single float

    Returns:
        float or (size,) array
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"stability index must lie in (0, 1), got {alpha}")
    draws = np.exp(_log_positive_stable(alpha, rng, _rows(size)))
    return float(draws[0]) if size is None else draws


def sample_gumbel_copula(theta: float, n: int, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """
    Gumbel-Hougaard copula by the frailty construction

    U_i = exp(-(E_i / S)^(1/theta)) with E_i iid unit exponentials and S
    positive stable with index 1/theta, so that
    P(U <= u) = E[exp(-S sum (-ln u_i)^theta)] = C(u).

    Args:
        theta: Dependence parameter >= 1
        n: Dimension >= 2
        rng: Random stream
        size: Number of vectors; None for a single (n,) vector

    Returns:
        (n,) or (size, n) array in (0,1)
    """
    if theta < 1.0:
        raise DomainError(f"theta must be >= 1, got {theta}")
    if n < 2:
        raise DomainError("copula dimension must be at least 2")
    m = _rows(size)

    if theta <= 1.0 + THETA_INDEPENDENCE_TOL:
        logger.debug("theta=%s treated as independence", theta)
        u = rng.uniform((m, n))
    else:
        log_s = _log_positive_stable(1.0 / theta, rng, m)
        e = rng.exponential((m, n))
        u = _open_unit(np.exp(-np.exp((np.log(e) - log_s[:, None]) / theta)))

    return u[0] if size is None else u


def sample_mo_copula(alpha1: float, alpha2: float, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """
    Marshall-Olkin copula by the common-shock construction

    Time on each margin is normalized so its total shock intensity is 1:
    the idiosyncratic shock fires at rate 1 - alpha_i and the common shock
    at rate alpha_i. With unit exponentials Z_1, Z_2, Z_12,
        tau_i = min(Z_i / (1 - alpha_i), Z_12 / alpha_i),  U_i = exp(-tau_i).
    The shared Z_12 produces the singular component U_1 = U_2.

    Args:
        alpha1, alpha2: Common-shock shares in [0, 1]
        rng: Random stream
        size: Number of pairs; None for a single pair

    Returns:
        (2,) or (size, 2) array in (0,1)
    """
    for name, a in (("alpha1", alpha1), ("alpha2", alpha2)):
        if not (0.0 <= a <= 1.0):
            raise DomainError(f"{name} must lie in [0, 1], got {a}")
    m = _rows(size)
    z = rng.exponential((m, 3))
    common = z[:, 2]

    def first_shock(own: np.ndarray, a: float) -> np.ndarray:
        idiosyncratic = own / (1.0 - a) if a < 1.0 else np.full(m, np.inf)
        shared = common / a if a > 0.0 else np.full(m, np.inf)
        return np.minimum(idiosyncratic, shared)

    tau = np.column_stack([first_shock(z[:, 0], alpha1), first_shock(z[:, 1], alpha2)])
    u = _open_unit(np.exp(-tau))
    return u[0] if size is None else u


def _correlation_factor(corr) -> np.ndarray:
    """A with A A^T = corr; Cholesky, or a clipped eigen-factor for singular PSD matrices"""
    matrix = np.asarray(corr, dtype=float)
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        eigenvalues, eigenvectors = np.linalg.eigh(matrix)
        if eigenvalues.min() < -1e-10:
            raise NumericalError("correlation matrix is not positive-semidefinite")
        return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def sample_gaussian_copula(corr, n: int, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """
    Gaussian copula: U = Phi(A Z) with corr = A A^T and Z iid standard normal

    Args:
        corr: n x n correlation matrix
        n: Dimension
        rng: Random stream
        size: Number of vectors; None for a single vector

    Returns:
        (n,) or (size, n) array in (0,1)
    """
    factor = _correlation_factor(corr)
    if factor.shape != (n, n):
        raise DimensionError(f"correlation matrix does not match dimension {n}")
    m = _rows(size)
    z = rng.normal((m, n))
    u = _open_unit(std_normal_cdf(z @ factor.T))
    return u[0] if size is None else u


def sample_copula(spec: CopulaSpec, size: int, rng: RngStream) -> np.ndarray:
    """
    Draw `size` vectors from any supported copula

    Returns:
        (size, spec.dim) array in (0,1)
    """
    family = spec.family
    if family == CopulaFamily.GUMBEL_HOUGAARD:
        return sample_gumbel_copula(spec.theta, spec.dim, rng, size)
    if family == CopulaFamily.MARSHALL_OLKIN:
        return sample_mo_copula(spec.alpha1, spec.alpha2, rng, size)
    if family == CopulaFamily.GAUSSIAN:
        return sample_gaussian_copula(spec.corr, spec.dim, rng, size)
    if family == CopulaFamily.INDEPENDENCE:
        return rng.uniform((_rows(size), spec.dim))
    if family == CopulaFamily.COMONOTONE:
        return np.repeat(rng.uniform((_rows(size), 1)), spec.dim, axis=1)
    raise DomainError(f"no sampler for family {family}")


def to_arrival_times(u, lambdas: Sequence[float]) -> np.ndarray:
    """
    Survival-convention map tau_i = -ln(u_i) / lambda_i

    Args:
        u: Vector or (m, n) batch strictly inside (0,1)
        lambdas: Positive intensities, one per coordinate

    Returns:
        Arrival times with exponential(lambda_i) marginals
    """
    points = np.asarray(u, dtype=float)
    rates = np.asarray(lambdas, dtype=float)
    if points.shape[-1] != rates.size:
        raise DimensionError(f"{rates.size} intensities for points of shape {points.shape}")
    if np.any(rates <= 0):
        raise DomainError("intensities must be positive")
    if not np.all((points > 0.0) & (points < 1.0)):
        raise DomainError("uniforms must lie strictly inside (0, 1)")
    return -np.log(points) / rates


def chi_square_uniformity(column, bins: int = 20) -> float:
    """p-value of a chi-square test that a sample is uniform on (0, 1)"""
    counts, _ = np.histogram(np.asarray(column, dtype=float), bins=bins, range=(0.0, 1.0))
    return float(stats.chisquare(counts).pvalue)


def write_samples_csv(path: Optional[str], rows: np.ndarray, prefix: str = "u") -> None:
    """
    Write a scenario matrix as CSV (header u1..un or tau1..taun, %.17g values)

    Args:
        path: Output file; stdout when None or '-'
        rows: (scenarios, n) array
        prefix: Column name prefix
    """
    write_output(samples_csv(rows, prefix), path)
