"""Validation and round trips of the pydantic models"""
import json

import pytest
from pydantic import ValidationError

from models import (
    ArrivalTimeModel, CommandName, CopulaFamily, CopulaSpec, PickandsFn, RunConfig
)


@pytest.mark.parametrize("name", ["GumbelHougaard", "gumbel-hougaard", "gumbel_hougaard", "gumbel"])
def test_family_aliases(name):
    spec = CopulaSpec(family=name, theta=2.0)
    assert spec.family == CopulaFamily.GUMBEL_HOUGAARD


def test_gumbel_theta_bounds():
    CopulaSpec.gumbel(1.0)
    CopulaSpec.gumbel(1e4)
    with pytest.raises(ValidationError):
        CopulaSpec.gumbel(0.5)
    with pytest.raises(ValidationError):
        CopulaSpec(family="gumbel")


def test_marshall_olkin_is_bivariate():
    with pytest.raises(ValidationError):
        CopulaSpec(family="MarshallOlkin", alpha1=0.2, alpha2=0.3, dim=3)
    with pytest.raises(ValidationError):
        CopulaSpec.marshall_olkin(1.2, 0.3)


def test_parameters_of_other_families_rejected():
    with pytest.raises(ValidationError):
        CopulaSpec(family="independence", theta=2.0)


@pytest.mark.parametrize("corr", [
    [[1.0, 1.0], [1.0, 1.0]],
    [[1.0, 0.3], [0.2, 1.0]],
    [[2.0, 0.3], [0.3, 1.0]],
    [[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]],
])
def test_invalid_correlation_rejected(corr):
    with pytest.raises(ValidationError):
        CopulaSpec.gaussian_matrix(corr)


def test_from_json_infers_dimension():
    corr = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.1], [0.2, 0.1, 1.0]]
    spec = CopulaSpec.from_json(json.dumps({"family": "Gaussian", "corr": corr}))
    assert spec.dim == 3


@pytest.mark.parametrize("spec", [
    CopulaSpec.gumbel(3.0, dim=4),
    CopulaSpec.marshall_olkin(0.2, 0.9),
    CopulaSpec.gaussian(-0.4),
    CopulaSpec.independence(3),
    CopulaSpec.comonotone(),
])
def test_spec_json_round_trip(spec):
    assert CopulaSpec.from_json(spec.to_json()) == spec


def test_rho_only_for_bivariate_gaussian():
    assert CopulaSpec.gaussian(0.9).rho == 0.9
    with pytest.raises(AttributeError):
        CopulaSpec.gumbel(2.0).rho


def test_arrival_model_dimension_must_match():
    with pytest.raises(ValidationError):
        ArrivalTimeModel(lambdas=[0.02, 0.02, 0.02], copula=CopulaSpec.gumbel(2.0))
    with pytest.raises(ValidationError):
        ArrivalTimeModel(lambdas=[0.02, -1.0], copula=CopulaSpec.gumbel(2.0))


def test_pickands_fn_parameters():
    assert PickandsFn.gumbel(2.0).theta == 2.0
    with pytest.raises(ValidationError):
        PickandsFn.gumbel(0.9)
    with pytest.raises(ValidationError):
        PickandsFn.marshall_olkin(0.5, 1.5)


def test_run_config_lambda_mismatch_reports_field():
    with pytest.raises(ValidationError) as info:
        RunConfig(command="chain-compare", copula=CopulaSpec.gumbel(2.0), lambdas=[0.02, 0.02, 0.02])
    assert info.value.errors()[0]["loc"] == ("lambdas",)


def test_run_config_chain_compare_requires_lambdas():
    with pytest.raises(ValidationError):
        RunConfig(command="chain-compare", copula=CopulaSpec.gumbel(2.0))


def test_run_config_canonical_round_trip():
    config = RunConfig(
        command=CommandName.CHAIN_COMPARE,
        copula={"family": "Gaussian", "corr": [[1.0, 0.9], [0.9, 1.0]]},
        lambdas=[0.02, 0.02],
        N=100,
        T=1.0,
        scenarios=1000,
        seed=42,
    )
    text = config.canonical_json()
    again = RunConfig.model_validate_json(text)
    assert again == config
    assert again.canonical_json() == text
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_run_config_omits_execution_details():
    config = RunConfig(command="verify", copula=CopulaSpec.gumbel(3.0), workers=8, output_path="out.json")
    payload = json.loads(config.canonical_json())
    assert "workers" not in payload
    assert "output_path" not in payload
