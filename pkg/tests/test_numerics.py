"""Normal CDFs, random streams and Monte Carlo aggregation"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import numerics
from errors import DomainError
from numerics import (
    RngStream, batch_sizes, bivariate_normal_cdf, mc_estimate, mc_estimate_counts,
    run_batches, std_normal_cdf, std_normal_inv_cdf
)


def orthant(rho: float) -> float:
    """P(X <= 0, Y <= 0) for a standard bivariate normal"""
    return 0.25 + math.asin(rho) / (2.0 * math.pi)


def test_std_normal_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-12)
    assert std_normal_cdf(-40.0) >= 0.0


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_std_normal_cdf_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert std_normal_cdf(lo) <= std_normal_cdf(hi)


def test_std_normal_inv_cdf_known_quantiles():
    assert std_normal_inv_cdf(0.5) == 0.0
    assert std_normal_inv_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
    assert std_normal_inv_cdf(math.exp(-2.0)) == pytest.approx(-1.1015, abs=1e-4)


@given(st.floats(1e-12, 1.0 - 1e-12))
def test_std_normal_inv_cdf_inverts(p):
    assert std_normal_cdf(std_normal_inv_cdf(p)) == pytest.approx(p, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_std_normal_inv_cdf_rejects_closed_endpoints(p):
    with pytest.raises(DomainError):
        std_normal_inv_cdf(p)


def test_std_normal_inv_cdf_array():
    p = np.array([0.1, 0.5, 0.9])
    x = std_normal_inv_cdf(p)
    np.testing.assert_allclose(x, [-x[2], 0.0, x[2]], atol=1e-14)


@pytest.mark.parametrize("rho", [-0.95, -0.9, -0.5, -0.2, 0.0, 0.2, 0.5, 0.75, 0.9, 0.93, 0.99])
def test_bivariate_normal_orthant(rho):
    assert bivariate_normal_cdf(0.0, 0.0, rho) == pytest.approx(orthant(rho), abs=1e-12)


def test_bivariate_normal_strong_correlation_value():
    assert bivariate_normal_cdf(0.0, 0.0, 0.9) == pytest.approx(0.25 + math.asin(0.9) / (2.0 * math.pi), abs=1e-15)
    assert bivariate_normal_cdf(0.0, 0.0, 0.9) == pytest.approx(0.4282169, abs=1e-7)


def test_bivariate_normal_independent_factorises():
    for x, y in [(-1.0, 0.5), (0.3, 2.0), (-2.5, -0.7)]:
        assert bivariate_normal_cdf(x, y, 0.0) == pytest.approx(std_normal_cdf(x) * std_normal_cdf(y), abs=1e-15)


def test_bivariate_normal_infinite_limits():
    assert bivariate_normal_cdf(0.7, math.inf, 0.6) == pytest.approx(std_normal_cdf(0.7), abs=1e-15)
    assert bivariate_normal_cdf(-math.inf, 0.3, 0.6) == 0.0
    assert bivariate_normal_cdf(math.inf, math.inf, -0.4) == 1.0


@given(
    st.floats(-6, 6), st.floats(-6, 6), st.floats(-0.99, 0.99)
)
def test_bivariate_normal_symmetric_and_bounded(x, y, rho):
    value = bivariate_normal_cdf(x, y, rho)
    assert value == pytest.approx(bivariate_normal_cdf(y, x, rho), abs=1e-12)
    assert 0.0 <= value <= min(std_normal_cdf(x), std_normal_cdf(y)) + 1e-12


def test_bivariate_normal_array_input():
    values = bivariate_normal_cdf(np.zeros(3), np.zeros(3), 0.5)
    np.testing.assert_allclose(values, orthant(0.5), atol=1e-12)


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.2])
def test_bivariate_normal_rejects_degenerate_correlation(rho):
    with pytest.raises(DomainError):
        bivariate_normal_cdf(0.0, 0.0, rho)


def test_bivariate_normal_rejects_nan():
    with pytest.raises(DomainError):
        bivariate_normal_cdf(math.nan, 0.0, 0.3)


def test_rng_stream_reproducible():
    a = RngStream(seed=7).uniform(1000)
    b = RngStream(seed=7).uniform(1000)
    np.testing.assert_array_equal(a, b)


def test_rng_streams_differ_by_id_and_substream():
    base = RngStream(seed=7).uniform(10)
    assert not np.array_equal(base, RngStream(seed=7, stream_id=1).uniform(10))
    assert not np.array_equal(base, RngStream(seed=7).substream(0).uniform(10))
    assert not np.array_equal(
        RngStream(seed=7).substream(0).uniform(10), RngStream(seed=7).substream(1).uniform(10)
    )


@pytest.mark.parametrize("first, second", [
    (RngStream(seed=42, stream_id=0), RngStream(seed=42, stream_id=1)),
    (RngStream(seed=42, stream_id=1), RngStream(seed=42, stream_id=2)),
    (RngStream(seed=42).substream(0), RngStream(seed=42).substream(1)),
])
def test_distinct_streams_are_uncorrelated(first, second):
    rho = np.corrcoef(first.uniform(100_000), second.uniform(100_000))[0, 1]
    assert abs(rho) < 0.01


def test_rng_uniform_open_interval():
    u = RngStream(seed=3).uniform(100_000)
    assert np.all(u > 0.0) and np.all(u < 1.0)


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_rng_rejects_out_of_range_seed(seed):
    with pytest.raises(DomainError):
        RngStream(seed=seed)


def test_batch_sizes_partition():
    assert batch_sizes(10, 4) == [4, 4, 2]
    assert batch_sizes(8, 4) == [4, 4]
    assert sum(batch_sizes(250_001)) == 250_001


def test_run_batches_independent_of_worker_count():
    def draw(size, stream):
        return float(stream.uniform(size).sum())

    serial = run_batches(10_000, RngStream(11), draw, batch_size=1_000, workers=1)
    threaded = run_batches(10_000, RngStream(11), draw, batch_size=1_000, workers=4)
    assert serial == threaded
    assert len(serial) == 10


def test_run_batches_uses_default_batch_size(monkeypatch):
    monkeypatch.setattr(numerics, "DEFAULT_BATCH_SIZE", 300)
    sizes = run_batches(1000, RngStream(1), lambda size, stream: size)
    assert sizes == [300, 300, 300, 100]


def test_mc_estimate_all_ones_and_zeros():
    ones = mc_estimate(iter([1] * 100), 100)
    zeros = mc_estimate(iter([0] * 100), 100)
    assert (ones.mean, ones.stderr) == (1.0, 0.0)
    assert (zeros.mean, zeros.stderr) == (0.0, 0.0)


def test_mc_estimate_alternating():
    estimate = mc_estimate((i % 2 for i in range(10_000)), 1000, seed=5)
    assert estimate.mean == 0.5
    assert estimate.stderr == pytest.approx(0.0158, abs=1e-4)
    assert estimate.n_scenarios == 1000
    assert estimate.seed == 5


def test_mc_estimate_errors():
    with pytest.raises(DomainError):
        mc_estimate(iter([1]), 0)
    with pytest.raises(DomainError):
        mc_estimate(iter([1, 0]), 5)


@settings(max_examples=50)
@given(st.integers(1, 10_000), st.data())
def test_mc_estimate_counts_stderr_identity(n, data):
    successes = data.draw(st.integers(0, n))
    estimate = mc_estimate_counts(successes, n)
    m = successes / n
    assert estimate.stderr == pytest.approx(math.sqrt(m * (1 - m) / n), abs=1e-15)
