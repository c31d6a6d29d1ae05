"""Pickands functions and Kendall's tau"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from copulas import copula_cdf
from errors import DomainError
from extreme_value import (
    check_pickands_validity, copula_from_pickands, evaluate_pickands, kendall_tau_analytic,
    kendall_tau_empirical, kendall_tau_gumbel, kendall_tau_naive, pickands_eval, pickands_for_spec,
    upper_tail_dependence
)
from models import CopulaSpec, PickandsFn, PickandsKind
from numerics import RngStream
from samplers import sample_copula

T_GRID = np.linspace(0.0, 1.0, 101)


def test_gumbel_pickands_values():
    A = PickandsFn.gumbel(2.0)
    assert pickands_eval(A, 0.5) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert pickands_eval(A, 0.0) == 1.0
    assert pickands_eval(A, 1.0) == 1.0
    np.testing.assert_allclose(pickands_eval(PickandsFn.gumbel(1.0), T_GRID), 1.0, atol=1e-15)


def test_marshall_olkin_pickands_values():
    assert pickands_eval(PickandsFn.marshall_olkin(1.0, 1.0), 0.5) == 0.5
    assert pickands_eval(PickandsFn.marshall_olkin(0.2, 0.9), 0.5) == pytest.approx(0.9)
    assert pickands_eval(PickandsFn.constant1(), 0.3) == 1.0


def test_pickands_rejects_outside_unit_interval():
    with pytest.raises(DomainError):
        pickands_eval(PickandsFn.gumbel(2.0), 1.2)


@pytest.mark.parametrize("A", [
    PickandsFn.gumbel(1.0),
    PickandsFn.gumbel(2.0),
    PickandsFn.gumbel(50.0),
    PickandsFn.marshall_olkin(0.2, 0.9),
    PickandsFn.marshall_olkin(1.0, 1.0),
    PickandsFn.constant1(),
])
def test_parametric_pickands_are_valid(A):
    report = check_pickands_validity(A)
    assert report.valid
    assert report.endpoint_error <= 1e-12


def test_invalid_candidates_are_reported():
    concave = check_pickands_validity(lambda t: 1.0 - 0.5 * np.sin(np.pi * t) ** 2)
    assert not concave.valid
    assert concave.convexity_violation > 0.0

    below_envelope = check_pickands_validity(lambda t: np.full_like(t, 0.4))
    assert not below_envelope.valid
    assert below_envelope.envelope_violation == pytest.approx(0.6)
    assert below_envelope.endpoint_error == pytest.approx(0.6)


def test_validity_grid_must_have_three_points():
    with pytest.raises(DomainError):
        check_pickands_validity(PickandsFn.constant1(), grid_size=2)


@pytest.mark.parametrize("spec", [
    CopulaSpec.gumbel(3.0),
    CopulaSpec.marshall_olkin(0.2, 0.9),
    CopulaSpec.independence(),
    CopulaSpec.comonotone(),
])
def test_copula_from_pickands_reproduces_family(spec):
    A = pickands_for_spec(spec)
    for u, v in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.05), (0.33, 0.61)]:
        assert copula_from_pickands(A, u, v) == pytest.approx(copula_cdf(spec, [u, v]), rel=1e-12)


@settings(max_examples=50)
@given(st.floats(1.0, 30.0), st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.1, 10.0))
def test_pickands_copula_is_self_chaining(theta, u, v, k):
    A = PickandsFn.gumbel(theta)
    lhs = copula_from_pickands(A, u ** k, v ** k)
    rhs = copula_from_pickands(A, u, v) ** k
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_copula_from_pickands_needs_interior_points():
    with pytest.raises(DomainError):
        copula_from_pickands(PickandsFn.constant1(), 0.0, 0.5)


def test_evaluate_pickands():
    evaluation = evaluate_pickands(PickandsFn.marshall_olkin(1.0, 1.0), grid_size=11)
    assert len(evaluation.t) == len(evaluation.values) == 11
    assert evaluation.values[5] == pytest.approx(0.5)
    assert evaluation.validity.valid
    assert evaluation.pickands.kind == PickandsKind.MARSHALL_OLKIN


def test_pickands_for_spec():
    assert pickands_for_spec(CopulaSpec.independence()).kind == PickandsKind.CONSTANT1
    assert pickands_for_spec(CopulaSpec.gumbel(2.0)).theta == 2.0
    assert pickands_for_spec(CopulaSpec.gaussian(0.5)) is None
    assert pickands_for_spec(CopulaSpec.gumbel(2.0, dim=3)) is None


def test_upper_tail_dependence():
    assert upper_tail_dependence(PickandsFn.gumbel(2.0)) == pytest.approx(2.0 - math.sqrt(2.0))
    assert upper_tail_dependence(PickandsFn.constant1()) == 0.0
    assert upper_tail_dependence(PickandsFn.marshall_olkin(1.0, 1.0)) == 1.0


def test_analytic_tau():
    assert kendall_tau_gumbel(2.0) == 0.5
    assert kendall_tau_analytic(CopulaSpec.marshall_olkin(0.5, 0.5)) == pytest.approx(1.0 / 3.0)
    assert kendall_tau_analytic(CopulaSpec.gaussian(0.9)) == pytest.approx(0.7129, abs=1e-4)
    assert kendall_tau_analytic(CopulaSpec.independence()) == 0.0
    assert kendall_tau_analytic(CopulaSpec.comonotone()) == 1.0
    with pytest.raises(DomainError):
        kendall_tau_gumbel(0.5)


@pytest.mark.parametrize("theta", [1.0, 2.0, 5.0, 10.0])
def test_empirical_tau_gumbel(theta):
    u = sample_copula(CopulaSpec.gumbel(theta), 100_000, RngStream(17))
    assert kendall_tau_empirical(u) == pytest.approx(1.0 - 1.0 / theta, abs=0.01)


@pytest.mark.parametrize("spec", [CopulaSpec.marshall_olkin(0.3, 0.8), CopulaSpec.gaussian(0.9)])
def test_empirical_tau_other_families(spec):
    u = sample_copula(spec, 100_000, RngStream(23))
    assert kendall_tau_empirical(u) == pytest.approx(kendall_tau_analytic(spec), abs=0.01)


def test_empirical_tau_extremes():
    x = np.arange(10.0)
    assert kendall_tau_empirical(np.column_stack([x, x])) == 1.0
    assert kendall_tau_empirical(np.column_stack([x, -x])) == -1.0
    assert kendall_tau_empirical(np.column_stack([x, np.ones(10)])) == 0.0


def test_fast_tau_matches_naive_count_with_ties():
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, 12, size=(400, 2)).astype(float)
    assert kendall_tau_empirical(pairs) == pytest.approx(kendall_tau_naive(pairs), abs=1e-12)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=2, max_size=60))
def test_fast_tau_matches_naive_property(pairs):
    data = np.array(pairs, dtype=float)
    assert kendall_tau_empirical(data) == pytest.approx(kendall_tau_naive(data), abs=1e-12)


def test_tau_input_validation():
    with pytest.raises(DomainError):
        kendall_tau_empirical([[0.1, 0.2]])
    with pytest.raises(DomainError):
        kendall_tau_naive(np.zeros((5, 3)))


def test_empirical_tau_is_exact_for_large_monotone_samples():
    x = np.random.default_rng(3).permutation(5000).astype(float)
    assert kendall_tau_empirical(np.column_stack([x, 2.0 * x + 1.0])) == 1.0
    assert kendall_tau_empirical(np.column_stack([x, -x])) == -1.0
    ties = np.column_stack([np.repeat(np.arange(50.0), 20), np.repeat(np.arange(50.0), 20)])
    assert kendall_tau_empirical(ties) == kendall_tau_naive(ties)
