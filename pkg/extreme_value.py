"""
Pickands dependence functions and Kendall's tau

Convention: for a bivariate extreme-value copula
    C(u, v) = exp(ln(uv) * A(ln v / ln(uv)))
so t is the weight of the second coordinate.
"""
import logging
import math
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats

from copulas import power_sum_root
from errors import DomainError
from models import (
    CopulaFamily, CopulaSpec, PickandsEvaluation, PickandsFn, PickandsKind,
    PickandsValidityReport
)

logger = logging.getLogger(__name__)

PickandsLike = Union[PickandsFn, Callable[[np.ndarray], np.ndarray]]


def pickands_eval(A: PickandsFn, t):
    """
    Evaluate a Pickands dependence function

    Args:
        A: Pickands function
        t: Scalar or array in [0, 1]

    Returns:
        A(t), float for scalar input
    """
    ts = np.asarray(t, dtype=float)
    if not np.all((ts >= 0.0) & (ts <= 1.0)):
        raise DomainError("Pickands functions are defined on [0, 1]")

    if A.kind == PickandsKind.GUMBEL:
        values = power_sum_root(np.stack([ts, 1.0 - ts], axis=-1), A.theta)
    elif A.kind == PickandsKind.MARSHALL_OLKIN:
        values = 1.0 - np.minimum(A.alpha1 * (1.0 - ts), A.alpha2 * ts)
    else:
        values = np.ones_like(ts)

    return float(values) if np.ndim(values) == 0 else values


def _evaluate(A: PickandsLike, t: np.ndarray) -> np.ndarray:
    if isinstance(A, PickandsFn):
        return np.asarray(pickands_eval(A, t), dtype=float)
    return np.broadcast_to(np.asarray(A(t), dtype=float), t.shape)


def copula_from_pickands(A: PickandsLike, u, v):
    """
    Extreme-value copula exp((ln u + ln v) A(ln v / (ln u + ln v)))

    Args:
        A: Pickands function (or any callable on [0, 1])
        u, v: Interior coordinates (scalars or equal-shape arrays)

    Returns:
        C(u, v)
    """
    us = np.asarray(u, dtype=float)
    vs = np.asarray(v, dtype=float)
    if not (np.all((us > 0.0) & (us < 1.0)) and np.all((vs > 0.0) & (vs < 1.0))):
        raise DomainError("copula_from_pickands needs interior points; boundary values follow from the axioms")

    log_u, log_v = np.log(us), np.log(vs)
    total = log_u + log_v
    value = np.exp(total * _evaluate(A, np.atleast_1d(log_v / total)).reshape(total.shape))
    return float(value) if value.ndim == 0 else value


def check_pickands_validity(A: PickandsLike, grid_size: int = 101, tol: float = 1e-9) -> PickandsValidityReport:
    """
    Check endpoints, the envelope max(t, 1-t) <= A(t) <= 1 and discrete convexity

    Args:
        A: Candidate function
        grid_size: Number of uniform grid points on [0, 1], at least 3
        tol: Allowed violation

    Returns:
        PickandsValidityReport; problems are report contents, not errors
    """
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    t = np.linspace(0.0, 1.0, grid_size)
    a = _evaluate(A, t)

    endpoint_error = float(max(abs(a[0] - 1.0), abs(a[-1] - 1.0)))
    lower = np.maximum(t, 1.0 - t)
    envelope_violation = float(max(0.0, np.max(lower - a), np.max(a - 1.0)))
    second = a[:-2] - 2.0 * a[1:-1] + a[2:]
    convexity_violation = float(max(0.0, -np.min(second)))
    logger.debug(
        "pickands check: endpoint %.3g, envelope %.3g, convexity %.3g",
        endpoint_error, envelope_violation, convexity_violation
    )

    return PickandsValidityReport(
        endpoint_error=endpoint_error,
        envelope_violation=envelope_violation,
        convexity_violation=convexity_violation,
        grid_size=grid_size,
        tol=tol,
        valid=max(endpoint_error, envelope_violation, convexity_violation) <= tol
    )


def evaluate_pickands(A: PickandsFn, grid_size: int = 101, tol: float = 1e-9) -> PickandsEvaluation:
    """A(t) on a uniform grid together with its validity report"""
    t = np.linspace(0.0, 1.0, grid_size)
    return PickandsEvaluation(
        pickands=A,
        t=t.tolist(),
        values=np.asarray(pickands_eval(A, t)).tolist(),
        validity=check_pickands_validity(A, grid_size, tol)
    )


def pickands_for_spec(spec: CopulaSpec) -> Optional[PickandsFn]:
    """Pickands function of a bivariate extreme-value spec; None for other copulas"""
    if spec.dim != 2:
        return None
    if spec.family == CopulaFamily.GUMBEL_HOUGAARD:
        return PickandsFn.gumbel(spec.theta)
    if spec.family == CopulaFamily.MARSHALL_OLKIN:
        return PickandsFn.marshall_olkin(spec.alpha1, spec.alpha2)
    if spec.family == CopulaFamily.INDEPENDENCE:
        return PickandsFn.constant1()
    if spec.family == CopulaFamily.COMONOTONE:
        return PickandsFn.marshall_olkin(1.0, 1.0)
    return None


def upper_tail_dependence(A: PickandsFn) -> float:
    """lambda_U = 2 (1 - A(1/2))"""
    return 2.0 * (1.0 - pickands_eval(A, 0.5))


def kendall_tau_gumbel(theta: float) -> float:
    """Kendall's tau of the Gumbel-Hougaard copula, 1 - 1/theta"""
    if theta < 1:
        raise DomainError(f"theta must be >= 1, got {theta}")
    return 1.0 - 1.0 / theta


def kendall_tau_analytic(spec: CopulaSpec) -> Optional[float]:
    """
    Closed-form Kendall's tau where one is known

    Returns:
        tau, or None (Gaussian above two dimensions)
    """
    family = spec.family
    if family == CopulaFamily.GUMBEL_HOUGAARD:
        return kendall_tau_gumbel(spec.theta)
    if family == CopulaFamily.MARSHALL_OLKIN:
        a1, a2 = spec.alpha1, spec.alpha2
        denominator = a1 + a2 - a1 * a2
        return a1 * a2 / denominator if denominator > 0 else 0.0
    if family == CopulaFamily.GAUSSIAN:
        return 2.0 / math.pi * math.asin(spec.rho) if spec.dim == 2 else None
    if family == CopulaFamily.INDEPENDENCE:
        return 0.0
    return 1.0


def _as_pairs(pairs) -> np.ndarray:
    data = np.asarray(pairs, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError(f"expected (n, 2) pairs, got shape {data.shape}")
    if data.shape[0] < 2:
        raise DomainError("Kendall's tau needs at least 2 pairs")
    return data


def _tied_pairs(column: np.ndarray) -> int:
    _, counts = np.unique(column, return_counts=True)
    return int(np.sum(counts.astype(np.int64) * (counts - 1) // 2))


def kendall_tau_empirical(pairs) -> float:
    """
    (concordant - discordant) / (n choose 2), ties contributing zero

    scipy's O(n log n) merge-sort tau-b is rescaled to this tie convention
    using the tie counts of each coordinate.

    Args:
        pairs: (n, 2) sample, n >= 2

    Returns:
        Estimated tau in [-1, 1]
    """
    data = _as_pairs(pairs)
    n = data.shape[0]
    total = n * (n - 1) // 2
    ties_x = _tied_pairs(data[:, 0])
    ties_y = _tied_pairs(data[:, 1])
    if ties_x == total or ties_y == total:
        return 0.0

    tau_b = stats.kendalltau(data[:, 0], data[:, 1])[0]
    # concordant - discordant is an integer count
    net_concordance = round(tau_b * math.sqrt((total - ties_x) * (total - ties_y)))
    return float(np.clip(net_concordance / total, -1.0, 1.0))


def kendall_tau_naive(pairs) -> float:
    """O(n^2) concordance count with the same tie convention"""
    data = _as_pairs(pairs)
    n = data.shape[0]
    dx = np.sign(data[:, 0][:, None] - data[:, 0][None, :])
    dy = np.sign(data[:, 1][:, None] - data[:, 1][None, :])
    # Each unordered pair appears twice in the full matrix
    return float(np.sum(dx * dy) / 2.0 / (n * (n - 1) / 2.0))
