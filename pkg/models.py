"""
Core data models for copula-coupled exponential arrival times
"""
import json
import math
from typing import Optional, List, Union
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Upper bound on the Gumbel-Hougaard dependence parameter
THETA_MAX = 1e4


class CopulaFamily(str, Enum):
    """Supported copula families"""
    GUMBEL_HOUGAARD = "gumbel_hougaard"
    MARSHALL_OLKIN = "marshall_olkin"
    GAUSSIAN = "gaussian"
    INDEPENDENCE = "independence"
    COMONOTONE = "comonotone"


# Accepted spellings in JSON input, compared after lowercasing and dropping separators
_FAMILY_ALIASES = {
    "gumbelhougaard": CopulaFamily.GUMBEL_HOUGAARD,
    "gumbel": CopulaFamily.GUMBEL_HOUGAARD,
    "marshallolkin": CopulaFamily.MARSHALL_OLKIN,
    "mo": CopulaFamily.MARSHALL_OLKIN,
    "gaussian": CopulaFamily.GAUSSIAN,
    "normal": CopulaFamily.GAUSSIAN,
    "independence": CopulaFamily.INDEPENDENCE,
    "product": CopulaFamily.INDEPENDENCE,
    "comonotone": CopulaFamily.COMONOTONE,
    "comonotonic": CopulaFamily.COMONOTONE,
}


class CopulaSpec(BaseModel):
    """Tagged copula family descriptor with validated parameters"""
    model_config = ConfigDict(frozen=True)

    family: CopulaFamily
    dim: int = Field(2, ge=2, description="Number of coupled coordinates")
    theta: Optional[float] = Field(None, ge=1.0, le=THETA_MAX, description="Gumbel-Hougaard dependence parameter")
    alpha1: Optional[float] = Field(None, ge=0.0, le=1.0, description="Marshall-Olkin common-shock share, coordinate 1")
    alpha2: Optional[float] = Field(None, ge=0.0, le=1.0, description="Marshall-Olkin common-shock share, coordinate 2")
    corr: Optional[List[List[float]]] = Field(None, description="Gaussian correlation matrix")

    @field_validator('family', mode='before')
    @classmethod
    def normalize_family(cls, v):
        """Accept CamelCase, kebab-case and short names for the family"""
        if isinstance(v, str):
            key = v.lower().replace("-", "").replace("_", "").replace(" ", "")
            if key in _FAMILY_ALIASES:
                return _FAMILY_ALIASES[key]
        return v

    @model_validator(mode='before')
    @classmethod
    def infer_dimension(cls, data):
        """A correlation matrix fixes dim when dim is omitted"""
        if isinstance(data, dict) and data.get("corr") is not None and "dim" not in data:
            return {**data, "dim": len(data["corr"])}
        return data

    @model_validator(mode='after')
    def validate_family_parameters(self):
        """Check that exactly the parameters of the chosen family are present and valid"""
        family = self.family

        if family == CopulaFamily.GUMBEL_HOUGAARD:
            if self.theta is None:
                raise ValueError("Gumbel-Hougaard copula requires theta")
        elif self.theta is not None:
            raise ValueError(f"theta is not a parameter of the {family.value} copula")

        if family == CopulaFamily.MARSHALL_OLKIN:
            if self.alpha1 is None or self.alpha2 is None:
                raise ValueError("Marshall-Olkin copula requires alpha1 and alpha2")
            if self.dim != 2:
                raise ValueError("Marshall-Olkin copula is bivariate only")
        elif self.alpha1 is not None or self.alpha2 is not None:
            raise ValueError(f"alpha1/alpha2 are not parameters of the {family.value} copula")

        if family == CopulaFamily.GAUSSIAN:
            if self.corr is None:
                raise ValueError("Gaussian copula requires a correlation matrix")
            _validate_correlation(self.corr, self.dim)
        elif self.corr is not None:
            raise ValueError(f"corr is not a parameter of the {family.value} copula")

        return self

    @classmethod
    def gumbel(cls, theta: float, dim: int = 2) -> "CopulaSpec":
        return cls(family=CopulaFamily.GUMBEL_HOUGAARD, theta=theta, dim=dim)

    @classmethod
    def marshall_olkin(cls, alpha1: float, alpha2: float) -> "CopulaSpec":
        return cls(family=CopulaFamily.MARSHALL_OLKIN, alpha1=alpha1, alpha2=alpha2, dim=2)

    @classmethod
    def gaussian(cls, rho: float) -> "CopulaSpec":
        """Bivariate Gaussian copula with correlation rho"""
        return cls(family=CopulaFamily.GAUSSIAN, corr=[[1.0, rho], [rho, 1.0]], dim=2)

    @classmethod
    def gaussian_matrix(cls, corr: List[List[float]]) -> "CopulaSpec":
        return cls(family=CopulaFamily.GAUSSIAN, corr=corr, dim=len(corr))

    @classmethod
    def independence(cls, dim: int = 2) -> "CopulaSpec":
        return cls(family=CopulaFamily.INDEPENDENCE, dim=dim)

    @classmethod
    def comonotone(cls, dim: int = 2) -> "CopulaSpec":
        return cls(family=CopulaFamily.COMONOTONE, dim=dim)

    @property
    def rho(self) -> float:
        """Correlation of a bivariate Gaussian spec"""
        if self.family != CopulaFamily.GAUSSIAN or self.dim != 2:
            raise AttributeError("rho is defined for bivariate Gaussian specs only")
        return self.corr[0][1]

    def to_json(self) -> dict:
        """JSON object with only the fields the family uses"""
        return self.model_dump(mode="json", exclude_none=True)

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "CopulaSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.model_validate(data)


def _validate_correlation(corr: List[List[float]], dim: int) -> None:
    """Symmetric, unit diagonal, strictly inside (-1, 1) off the diagonal, positive-semidefinite"""
    matrix = np.asarray(corr, dtype=float)
    if matrix.shape != (dim, dim):
        raise ValueError(f"corr must be a {dim}x{dim} matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("corr must be finite")
    if not np.allclose(matrix, matrix.T, atol=1e-12):
        raise ValueError("corr must be symmetric")
    if not np.allclose(np.diag(matrix), 1.0, atol=1e-12):
        raise ValueError("corr must have a unit diagonal")
    off_diagonal = matrix[~np.eye(dim, dtype=bool)]
    if np.any(np.abs(off_diagonal) >= 1.0):
        # Perfect correlation is expressed with the comonotone family
        raise ValueError("corr entries must lie strictly inside (-1, 1); use the comonotone family for rho = 1")
    if np.linalg.eigvalsh(matrix).min() < -1e-10:
        raise ValueError("corr must be positive-semidefinite")


class ArrivalTimeModel(BaseModel):
    """Exponential marginals coupled by a survival-times copula"""
    lambdas: List[float] = Field(min_length=2, description="Marginal intensities (1/time)")
    copula: CopulaSpec

    @field_validator('lambdas')
    @classmethod
    def validate_positive_intensities(cls, v):
        """Ensure every intensity is positive and finite"""
        for lam in v:
            if not (lam > 0 and math.isfinite(lam)):
                raise ValueError("intensities must be positive and finite")
        return v

    @model_validator(mode='after')
    def validate_dimension(self):
        """Number of intensities must match the copula dimension"""
        if len(self.lambdas) != self.copula.dim:
            raise ValueError(
                f"{len(self.lambdas)} intensities given for a {self.copula.dim}-dimensional copula"
            )
        return self

    def marginal_survival(self, t: List[float]) -> np.ndarray:
        """G_i(t_i) = exp(-lambda_i t_i)"""
        return np.exp(-np.asarray(self.lambdas) * np.asarray(t, dtype=float))


class McEstimate(BaseModel):
    """Monte Carlo probability estimate with its binomial standard error"""
    mean: float = Field(ge=0, le=1)
    stderr: float = Field(ge=0)
    n_scenarios: int = Field(gt=0)
    seed: int = Field(ge=0)


class AxiomReport(BaseModel):
    """Largest violation of each copula axiom found by a numeric sweep"""
    groundedness_max: float = Field(ge=0, description="max |C(u)| with some u_i = 0")
    margins_max: float = Field(ge=0, description="max |C(1,..,u_k,..,1) - u_k|")
    min_volume: float = Field(description="Smallest rectangle volume found")
    volume_violation: float = Field(ge=0, description="max(0, -min_volume)")
    worst_rect: Optional[List[List[float]]] = Field(None, description="[[a_i, b_i], ...] of the smallest volume")
    n_rects: int = Field(gt=0)
    tol: float = Field(gt=0)
    passed: bool


class ResidualReport(BaseModel):
    """Maximum self-chaining residual over a grid of points and exponents"""
    max_residual: float = Field(ge=0)
    argmax_point: List[float]
    argmax_k: float = Field(gt=0)
    grid_size: int = Field(ge=1, description="Number of (point, k) evaluations")


class ChainReport(BaseModel):
    """One-shot against multi-step joint survival, analytic and simulated"""
    one_shot_analytic: float = Field(ge=0, le=1)
    multi_step_analytic: float = Field(ge=0, le=1)
    one_shot_mc: McEstimate
    multi_step_mc: McEstimate
    gap: float = Field(description="one_shot_analytic - multi_step_analytic")
    N: int = Field(ge=1, description="Number of sub-periods")
    T: float = Field(gt=0, description="Sub-period length")


class DecayPoint(BaseModel):
    """Multi-step survival over a fixed horizon split into N periods"""
    N: int = Field(ge=1)
    T: float = Field(gt=0)
    multi_step_analytic: float = Field(ge=0, le=1)


class PickandsKind(str, Enum):
    """Parametric Pickands dependence functions"""
    GUMBEL = "gumbel"
    MARSHALL_OLKIN = "marshall_olkin"
    CONSTANT1 = "constant1"


class PickandsFn(BaseModel):
    """Pickands dependence function A on [0, 1]"""
    model_config = ConfigDict(frozen=True)

    kind: PickandsKind
    theta: Optional[float] = Field(None, ge=1.0, le=THETA_MAX)
    alpha1: Optional[float] = Field(None, ge=0.0, le=1.0)
    alpha2: Optional[float] = Field(None, ge=0.0, le=1.0)

    @model_validator(mode='after')
    def validate_parameters(self):
        """Each kind carries its own parameters"""
        if self.kind == PickandsKind.GUMBEL and self.theta is None:
            raise ValueError("Gumbel Pickands function requires theta")
        if self.kind == PickandsKind.MARSHALL_OLKIN and (self.alpha1 is None or self.alpha2 is None):
            raise ValueError("Marshall-Olkin Pickands function requires alpha1 and alpha2")
        return self

    @classmethod
    def gumbel(cls, theta: float) -> "PickandsFn":
        return cls(kind=PickandsKind.GUMBEL, theta=theta)

    @classmethod
    def marshall_olkin(cls, alpha1: float, alpha2: float) -> "PickandsFn":
        return cls(kind=PickandsKind.MARSHALL_OLKIN, alpha1=alpha1, alpha2=alpha2)

    @classmethod
    def constant1(cls) -> "PickandsFn":
        return cls(kind=PickandsKind.CONSTANT1)


class PickandsValidityReport(BaseModel):
    """Endpoint, envelope and convexity checks of a Pickands candidate"""
    endpoint_error: float = Field(ge=0, description="max(|A(0)-1|, |A(1)-1|)")
    envelope_violation: float = Field(ge=0, description="Largest excursion outside [max(t,1-t), 1]")
    convexity_violation: float = Field(ge=0, description="Largest negative second difference")
    grid_size: int = Field(ge=3)
    tol: float = Field(gt=0)
    valid: bool


class PickandsEvaluation(BaseModel):
    """Dependence-function values on a grid with validity flags"""
    pickands: Optional[PickandsFn] = None
    t: List[float]
    values: List[float]
    validity: PickandsValidityReport


class TauReport(BaseModel):
    """Analytic (where known) and empirical Kendall's tau"""
    copula: CopulaSpec
    analytic: Optional[float] = None
    empirical: float = Field(ge=-1, le=1)
    n_samples: int = Field(ge=2)
    seed: int = Field(ge=0)


class Verdict(str, Enum):
    """Outcome of the self-chaining certification"""
    SELF_CHAINING = "SELF-CHAINING"
    NOT_SELF_CHAINING = "NOT SELF-CHAINING"


class VerificationReport(BaseModel):
    """Consolidated axiom and self-chaining certification"""
    copula: CopulaSpec
    axioms: AxiomReport
    residuals: ResidualReport
    residual_threshold: float
    homogeneity_max: float = Field(ge=0)
    homogeneity_threshold: float
    pde_max: float = Field(ge=0, description="Largest scaled PDE residual")
    pde_point: List[float]
    pde_threshold: float
    verdict: Verdict
    witness_point: Optional[List[float]] = Field(None, description="Point where self-chaining fails")
    witness_k: Optional[float] = None


class CommandName(str, Enum):
    """CLI workflows"""
    SIMULATE = "simulate"
    CHAIN_COMPARE = "chain-compare"
    VERIFY = "verify"
    PICKANDS = "pickands"
    TAU = "tau"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI run"""
    command: CommandName
    copula: CopulaSpec
    lambdas: Optional[List[float]] = Field(None, description="Marginal intensities (1/time)")
    N: int = Field(100, ge=1, description="Number of sub-periods")
    T: float = Field(1.0, gt=0, description="Sub-period length")
    scenarios: int = Field(100000, ge=1)
    seed: int = Field(42, ge=0, lt=2**64)
    workers: int = Field(1, ge=1, exclude=True, description="Thread count; results do not depend on it")
    output_path: Optional[str] = Field(None, exclude=True, description="Output file; stdout when absent or '-'")
    format: OutputFormat = OutputFormat.JSON
    arrival_times: bool = Field(False, description="simulate: emit arrival times instead of uniforms")
    grid_size: int = Field(101, ge=3, description="pickands: number of t grid points")

    @field_validator('lambdas')
    @classmethod
    def validate_lambdas(cls, v, info):
        """Intensities must be positive and match the copula dimension"""
        if v is None:
            return v
        if any(not (lam > 0 and math.isfinite(lam)) for lam in v):
            raise ValueError("intensities must be positive and finite")
        copula = info.data.get('copula')
        if copula is not None and len(v) != copula.dim:
            raise ValueError(f"lambdas has {len(v)} entries but the copula has dim {copula.dim}")
        return v

    @model_validator(mode='after')
    def validate_command_inputs(self):
        """Cross-field checks that depend on the command"""
        if self.command == CommandName.CHAIN_COMPARE and self.lambdas is None:
            raise ValueError("chain-compare requires lambdas")
        if self.command == CommandName.SIMULATE and self.arrival_times and self.lambdas is None:
            raise ValueError("arrival-time output requires lambdas")
        return self

    def canonical_json(self) -> str:
        """Sorted-key JSON that parses back to an equal config"""
        return json.dumps(self.model_dump(mode="json", exclude_none=True), sort_keys=True)

    def model(self) -> ArrivalTimeModel:
        if self.lambdas is None:
            raise ValueError("lambdas are not set")
        return ArrivalTimeModel(lambdas=self.lambdas, copula=self.copula)
