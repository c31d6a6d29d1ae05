"""
Numerical kernels - normal CDFs, reproducible random streams, Monte Carlo helpers
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import islice
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from config import DEFAULT_BATCH_SIZE
from errors import DomainError
from models import McEstimate

logger = logging.getLogger(__name__)

R = TypeVar("R")

_TWO_PI = 2.0 * math.pi
_SQRT_TWO_PI = math.sqrt(_TWO_PI)
_UINT64_LIMIT = 2 ** 64


def std_normal_cdf(x):
    """
    Standard normal CDF Phi

    Args:
        x: Scalar or array of reals

    Returns:
        Phi(x), same shape as x
    """
    return special.ndtr(x)


def std_normal_inv_cdf(p):
    """
    Inverse standard normal CDF

    scipy's ndtri is polished by one Newton step against std_normal_cdf,
    which keeps |Phi(result) - p| at rounding level.

    Args:
        p: Probability (scalar or array) strictly inside (0, 1)

    Returns:
        Phi^{-1}(p), same shape as p

    Raises:
        DomainError: If any p lies outside (0, 1)
    """
    probs = np.asarray(p, dtype=float)
    if not np.all((probs > 0.0) & (probs < 1.0)):
        raise DomainError("std_normal_inv_cdf requires 0 < p < 1")

    x = special.ndtri(probs)
    density = np.exp(-0.5 * x * x) / _SQRT_TWO_PI
    # Deep tails: the density underflows and ndtri is already exact
    step = np.where(density > 1e-300, (special.ndtr(x) - probs) / np.maximum(density, 1e-300), 0.0)
    x = x - step

    return float(x) if np.ndim(p) == 0 else x


@lru_cache(maxsize=None)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre abscissae and weights on [-1, 1]"""
    return leggauss(n)


def _bvnu(dh: float, dk: float, r: float) -> float:
    """
    Upper bivariate normal probability P(X > dh, Y > dk)

    Genz's rendition of the Drezner-Wesolowsky scheme: 6, 12 or 20 point
    Gauss-Legendre rules depending on |r|, and the series expansion around
    |r| = 1 for strong correlation.
    """
    if dh == math.inf or dk == math.inf:
        return 0.0
    if dh == -math.inf:
        return 1.0 if dk == -math.inf else float(special.ndtr(-dk))
    if dk == -math.inf:
        return float(special.ndtr(-dh))

    abs_r = abs(r)
    if abs_r < 0.3:
        x, w = _legendre(6)
    elif abs_r < 0.75:
        x, w = _legendre(12)
    else:
        x, w = _legendre(20)

    h, k = dh, dk
    hk = h * k

    if abs_r < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        sn = np.sin(asr * (1.0 + x) / 2.0)
        bvn = float(np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn))))
        bvn = bvn * asr / (4.0 * math.pi) + float(special.ndtr(-h) * special.ndtr(-k))
        return min(1.0, max(0.0, bvn))

    if r < 0:
        k = -k
        hk = -hk

    bvn = 0.0
    a_sq = (1.0 - r) * (1.0 + r)
    a = math.sqrt(a_sq)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    asr = -(bs / a_sq + hk) / 2.0
    if asr > -100.0:
        bvn = a * math.exp(asr) * (1.0 - c * (bs - a_sq) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_sq * a_sq / 5.0)
    if hk > -100.0:
        b = math.sqrt(bs)
        sp = _SQRT_TWO_PI * float(special.ndtr(-b / a))
        bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)

    half_a = a / 2.0
    xs = (half_a + half_a * x) ** 2
    rs = np.sqrt(1.0 - xs)
    asr_nodes = -(bs / xs + hk) / 2.0
    keep = asr_nodes > -100.0
    if np.any(keep):
        xs, rs, asr_nodes, wk = xs[keep], rs[keep], asr_nodes[keep], w[keep]
        sp_nodes = 1.0 + c * xs * (1.0 + d * xs)
        ep = np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
        bvn += half_a * float(np.sum(wk * np.exp(asr_nodes) * (ep - sp_nodes)))
    bvn = -bvn / _TWO_PI

    if r > 0:
        bvn += float(special.ndtr(-max(h, k)))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0:
            lower = float(special.ndtr(k) - special.ndtr(h))
        else:
            lower = float(special.ndtr(-h) - special.ndtr(-k))
        bvn = lower - bvn

    return min(1.0, max(0.0, bvn))


_bvnu_array = np.vectorize(_bvnu, otypes=[float])


def bivariate_normal_cdf(x, y, rho: float):
    """
    Standard bivariate normal CDF P(X <= x, Y <= y) with correlation rho

    Infinite limits reduce analytically: (x, +inf, rho) gives Phi(x).

    Args:
        x: Upper limit (scalar or array) for the first coordinate
        y: Upper limit (scalar or array) for the second coordinate
        rho: Correlation strictly inside (-1, 1)

    Returns:
        Probability (float for scalar inputs, array otherwise)

    Raises:
        DomainError: If |rho| >= 1 or an argument is NaN
    """
    if not (-1.0 < rho < 1.0):
        raise DomainError(f"bivariate_normal_cdf requires |rho| < 1, got {rho}")
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise DomainError("bivariate_normal_cdf arguments must not be NaN")

    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return _bvnu(-float(x), -float(y), float(rho))
    return _bvnu_array(-np.asarray(x, dtype=float), -np.asarray(y, dtype=float), float(rho))


@dataclass(frozen=True)
class RngStream:
    """
    Reproducible random stream keyed by (seed, stream_id)

    Backed by the counter-based Philox generator; the key is derived from a
    SeedSequence whose spawn key is (stream_id, *path), so distinct ids give
    independent streams and substreams partition work deterministically.
    A stream is stateful and must not be shared between concurrent tasks.
    """
    seed: int
    stream_id: int = 0
    path: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not (0 <= value < _UINT64_LIMIT):
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")

    @cached_property
    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(sequence))

    def substream(self, index: int) -> "RngStream":
        """Child stream for batch `index`; independent of the parent's state"""
        if index < 0:
            raise DomainError("substream index must be nonnegative")
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def uniform(self, size=None):
        """Uniforms on the open interval (0, 1)"""
        # random() draws from [0, 1); an exact zero is nudged up to keep logs finite
        return np.maximum(self.generator.random(size), np.finfo(float).tiny)

    def exponential(self, size=None):
        return self.generator.standard_exponential(size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)


def batch_sizes(n: int, batch_size: Optional[int] = None) -> List[int]:
    """Split n scenarios into fixed-size batches (last one possibly shorter)"""
    if n < 1:
        raise DomainError("number of scenarios must be positive")
    size = batch_size or DEFAULT_BATCH_SIZE
    full, rest = divmod(n, size)
    return [size] * full + ([rest] if rest else [])


def run_batches(
    n: int,
    rng: RngStream,
    fn: Callable[[int, RngStream], R],
    batch_size: Optional[int] = None,
    workers: int = 1
) -> List[R]:
    """
    Fan a Monte Carlo job out over fixed batches

    Batch i always draws from rng.substream(i) and results come back in batch
    order, so any aggregation is independent of the worker count.

    Args:
        n: Total number of scenarios
        rng: Parent stream
        fn: Called as fn(batch_scenarios, batch_stream)
        batch_size: Scenarios per batch (COPULA_BATCH_SIZE by default)
        workers: Thread count

    Returns:
        Per-batch results in batch index order
    """
    sizes = batch_sizes(n, batch_size)
    streams = [rng.substream(i) for i in range(len(sizes))]
    logger.debug("running %d scenarios in %d batches on %d workers", n, len(sizes), workers)

    if workers <= 1 or len(sizes) == 1:
        return [fn(size, stream) for size, stream in zip(sizes, streams)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, sizes, streams))


def mc_estimate_counts(successes: int, n: int, seed: int = 0) -> McEstimate:
    """
    McEstimate from a success count

    Args:
        successes: Number of indicators equal to 1
        n: Number of scenarios
        seed: Seed recorded with the estimate

    Returns:
        Mean and binomial standard error sqrt(m(1-m)/n)
    """
    if n < 1:
        raise DomainError("mc_estimate requires at least one scenario")
    if not (0 <= successes <= n):
        raise DomainError(f"success count {successes} outside [0, {n}]")

    mean = successes / n
    stderr = math.sqrt(mean * (1.0 - mean) / n)
    return McEstimate(mean=mean, stderr=stderr, n_scenarios=n, seed=seed)


def mc_estimate(indicator_stream: Iterable[int], n: int, seed: int = 0) -> McEstimate:
    """
    Monte Carlo estimate of a probability from 0/1 indicators

    Args:
        indicator_stream: Iterable of 0/1 (or booleans); the first n are used
        n: Number of scenarios
        seed: Seed recorded with the estimate

    Returns:
        McEstimate with Bernoulli standard error

    Raises:
        DomainError: If n < 1 or the stream ends early
    """
    if n < 1:
        raise DomainError("mc_estimate requires n >= 1")

    indicators = np.fromiter((int(bool(b)) for b in islice(indicator_stream, n)), dtype=np.int64)
    if indicators.size < n:
        raise DomainError(f"indicator stream ended after {indicators.size} of {n} values")

    return mc_estimate_counts(int(indicators.sum()), n, seed)
