"""Experiment definitions: one pydantic model per kind, discriminated on ``kind``.

Configs are loaded from JSON or YAML. Every stochastic kind requires an explicit
seed; nothing is drawn from wall-clock entropy.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import orjson
import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from rwrc_lab.config.loader import ConfigurationError, error_paths, format_validation_errors
from rwrc_lab.conductance.models import ConductanceModel, ConstantModel, EllipticModel, TailModel
from rwrc_lab.lattice import BoxSpec
from rwrc_lab.quadrature import Potential
from rwrc_lab.varprob.solver import ChiConfig


class ExperimentConfigError(ConfigurationError):
    """An experiment definition failed to load or validate.

    Attributes:
        paths: Dotted paths of the offending fields (empty for file-level errors).
    """

    def __init__(self, message: str, paths: Optional[List[str]] = None, hint: Optional[str] = None) -> None:
        self.paths = paths or []
        super().__init__(message, hint=hint)


class PotentialSpec(BaseModel):
    """V(y) = constant + linear·y + quadratic·|y − centre|²."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    constant: float = 0.0
    linear: Optional[List[float]] = Field(default=None, description="Coefficient per axis")
    quadratic: float = 0.0
    centre: Optional[List[float]] = Field(default=None, description="Centre of the quadratic part")

    def build(self) -> Union[float, Potential]:
        """A constant when only ``constant`` is set, a vectorised callable otherwise."""
        if self.linear is None and self.quadratic == 0.0:
            return self.constant

        def potential(y: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(y, dtype=float))
            values = np.full(pts.shape[0], self.constant)
            if self.linear is not None:
                values = values + pts @ np.asarray(self.linear, dtype=float)
            if self.quadratic:
                centre = np.asarray(self.centre or [0.0] * pts.shape[1], dtype=float)
                values = values + self.quadratic * np.sum((pts - centre) ** 2, axis=1)
            return values

        return potential


class _Experiment(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class _Stochastic(_Experiment):
    seed: int = Field(..., ge=0, description="Seed of every random stream in the run")


class SampleExperiment(_Stochastic):
    """Sample one conductance field and write it as an edge list."""

    kind: Literal["sample"] = "sample"
    box: BoxSpec
    model: ConductanceModel


class SimulateExperiment(_Stochastic):
    """Simulate walk paths in one sampled environment."""

    kind: Literal["simulate"] = "simulate"
    box: BoxSpec
    model: ConductanceModel
    horizon: float = Field(..., gt=0)
    start: Optional[List[int]] = Field(default=None, description="Start site (default: nearest the origin)")
    stop_on_exit: bool = True
    replicas: int = Field(default=1, ge=1, le=10_000)


class EigenExperiment(_Stochastic):
    """Lowest Dirichlet eigenpairs of −s·Δ^a + V in one sampled environment."""

    kind: Literal["eigen"] = "eigen"
    box: BoxSpec
    model: ConductanceModel
    k: int = Field(default=1, ge=1)
    potential: Optional[PotentialSpec] = None
    laplace_scale: float = Field(default=1.0, gt=0)


class _SolverFields(_Experiment):
    restarts: int = Field(default=4, ge=1)
    max_iter: int = Field(default=2000, ge=1)
    smoothing_levels: int = Field(default=8, ge=1, le=30)
    tol: float = Field(default=1e-8, gt=0)
    seed: int = Field(default=0, ge=0)

    def solver_config(self) -> ChiConfig:
        return ChiConfig(
            restarts=self.restarts,
            max_iter=self.max_iter,
            smoothing_levels=self.smoothing_levels,
            tol=self.tol,
            seed=self.seed,
        )


class ChiDExperiment(_SolverFields):
    """χ^d(B) for p given directly or through η (p = 2η/(η+1))."""

    kind: Literal["chi-d"] = "chi-d"
    box: BoxSpec
    p: Optional[float] = Field(default=None, gt=0, le=2)
    eta: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def validate_exponent(self) -> "ChiDExperiment":
        """Exactly one of p and eta."""
        if (self.p is None) == (self.eta is None):
            raise ValueError("give exactly one of 'p' and 'eta'")
        return self

    @property
    def exponent(self) -> float:
        if self.p is not None:
            return self.p
        if self.eta is None:
            raise ExperimentConfigError("give exactly one of 'p' and 'eta'", paths=["p", "eta"])
        return 2.0 * self.eta / (self.eta + 1.0)


class ChiCExperiment(_SolverFields):
    """χ^c(G) from rescaled χ^d on growing boxes."""

    kind: Literal["chi-c"] = "chi-c"
    G: List[Tuple[float, float]]
    eta: float = Field(..., gt=0)
    D: float = Field(default=1.0, gt=0)
    levels: List[float] = Field(..., min_length=1)
    force_p: Optional[float] = Field(default=None, gt=0, le=2)
    witness_grid: Optional[List[float]] = None


class NonexitExperiment(_Stochastic):
    """Annealed non-exit probabilities over a grid of horizons."""

    kind: Literal["nonexit"] = "nonexit"
    box: BoxSpec
    model: ConductanceModel
    horizons: List[float] = Field(..., min_length=1)
    n_env: int = Field(..., ge=1)
    n_walks: int = Field(default=64, ge=1)
    start: Optional[List[int]] = None

    @field_validator("horizons")
    @classmethod
    def validate_horizons(cls, v: List[float]) -> List[float]:
        """Horizons are non-negative."""
        if any(t < 0 for t in v):
            raise ValueError("horizons must be non-negative")
        return v


class LifshitzExperiment(_Stochastic):
    """Empirical tail Pr(λ^a(B) ≤ ε) over a grid of ε."""

    kind: Literal["lifshitz"] = "lifshitz"
    box: BoxSpec
    model: TailModel
    eps: List[float] = Field(..., min_length=1)
    n_env: int = Field(..., ge=1)
    chi_d: Optional[float] = Field(default=None, gt=0)

    @field_validator("eps")
    @classmethod
    def validate_eps(cls, v: List[float]) -> List[float]:
        """Thresholds are positive."""
        if any(e <= 0 for e in v):
            raise ValueError("eps values must be positive")
        return v


ElasticModelSpec = Annotated[Union[EllipticModel, ConstantModel], Field(discriminator="kind")]


class HomogExperiment(_Stochastic):
    """Spectral homogenisation on α(0,1)^d."""

    kind: Literal["homog"] = "homog"
    model: ElasticModelSpec
    d: int = Field(default=1, ge=1, le=3)
    sizes: List[float] = Field(..., min_length=1)
    j_max: int = Field(default=4, ge=1)
    n_env: int = Field(default=8, ge=1)
    potential: Optional[PotentialSpec] = None


class RegimeExperiment(_Experiment):
    """Regime classification and, with (t, α), the admissibility window."""

    kind: Literal["regime"] = "regime"
    eta: float = Field(..., gt=0)
    d: int = Field(..., ge=1)
    t: Optional[float] = Field(default=None, gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)
    threshold: float = Field(default=0.1, gt=0, le=1)


class PredictExperiment(_Experiment):
    """Leading-order predictions for the non-exit probability or the growing-box Lifshitz tail."""

    kind: Literal["predict"] = "predict"
    target: Literal["nonexit", "lifshitz"] = "nonexit"
    eta: float = Field(..., gt=0)
    D: float = Field(default=1.0, gt=0)
    d: int = Field(..., ge=1)
    t: Optional[float] = Field(default=None, gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)
    s: Optional[float] = None
    chi_c: Optional[float] = Field(default=None, gt=0)
    chi_d_box: Optional[float] = Field(default=None, gt=0)
    chi_d_Zd: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def validate_target(self) -> "PredictExperiment":
        """Non-exit predictions need (t, α); Lifshitz predictions need s and χ^c."""
        if self.target == "nonexit" and (self.t is None or self.alpha is None):
            raise ValueError("target 'nonexit' needs t and alpha")
        if self.target == "lifshitz" and (self.s is None or self.chi_c is None):
            raise ValueError("target 'lifshitz' needs s and chi_c")
        return self


class PredictorSpec(_Experiment):
    """The line a Monte Carlo table is compared against.

    ``nonexit``: log P ≈ −K·χ·u(t) with u = γ_t (spread-out, needs alpha) or
    t^{η/(η+1)}; χ is χ^c(G) or χ^d(Z^d) accordingly.
    ``lifshitz``: log Pr ≈ −D·χ^{η+1}·ε^{−η} with χ = χ^d(B).
    ``lifshitz-singleton``: the exact singleton-box tail evaluated on the table's ε grid.
    """

    kind: Literal["nonexit", "lifshitz", "lifshitz-singleton"]
    eta: float = Field(..., gt=0)
    D: float = Field(..., gt=0)
    d: int = Field(default=1, ge=1)
    alpha: Optional[float] = Field(default=None, gt=0)
    chi: Optional[float] = Field(default=None, gt=0)
    cap: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def validate_inputs(self) -> "PredictorSpec":
        """Line predictors need χ."""
        if self.kind != "lifshitz-singleton" and self.chi is None:
            raise ValueError(f"predictor '{self.kind}' needs chi")
        return self


DatasetSpec = Annotated[Union[NonexitExperiment, LifshitzExperiment], Field(discriminator="kind")]


class CompareSlopesExperiment(_Experiment):
    """Weighted log-space slope fit of a Monte Carlo table against a predictor."""

    kind: Literal["compare-slopes"] = "compare-slopes"
    predictor: PredictorSpec
    table: Optional[str] = Field(default=None, description="CSV or JSON table with x, estimate and CI columns")
    dataset: Optional[DatasetSpec] = None

    @field_validator("table")
    @classmethod
    def validate_table(cls, v: Optional[str]) -> Optional[str]:
        """Referenced tables must exist."""
        if v is not None and not Path(v).is_file():
            raise ValueError(f"table file not found: {v}")
        return v

    @model_validator(mode="after")
    def validate_source(self) -> "CompareSlopesExperiment":
        """Exactly one of table and dataset."""
        if (self.table is None) == (self.dataset is None):
            raise ValueError("give exactly one of 'table' and 'dataset'")
        return self


ExperimentConfig = Annotated[
    Union[
        SampleExperiment,
        SimulateExperiment,
        EigenExperiment,
        ChiDExperiment,
        ChiCExperiment,
        NonexitExperiment,
        LifshitzExperiment,
        HomogExperiment,
        RegimeExperiment,
        PredictExperiment,
        CompareSlopesExperiment,
    ],
    Field(discriminator="kind"),
]

_ADAPTER: TypeAdapter[Any] = TypeAdapter(ExperimentConfig)

EXPERIMENT_KINDS = (
    "sample",
    "simulate",
    "eigen",
    "chi-d",
    "chi-c",
    "nonexit",
    "lifshitz",
    "homog",
    "regime",
    "predict",
    "compare-slopes",
)


def parse_experiment(data: Dict[str, Any]) -> Any:
    """Validate a mapping as an experiment config.

    Raises:
        ExperimentConfigError: With the dotted paths of all offending fields.
    """
    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as e:
        kind = data.get("kind")
        errors = []
        for error in e.errors():
            loc = tuple(error.get("loc", ()))
            # the discriminated union prefixes every location with the tag
            if loc and loc[0] == kind:
                loc = loc[1:]
            errors.append({**error, "loc": loc})
        raise ExperimentConfigError(
            "\n".join(format_validation_errors(errors)),
            paths=error_paths(errors),
            hint="Run 'rwrc-lab schema' for the accepted fields of every kind.",
        ) from None


def load_experiment(path: Union[str, Path]) -> Any:
    """Read and validate a JSON or YAML experiment file.

    Raises:
        ExperimentConfigError: If the file is missing, unparsable or invalid.
    """
    source = Path(path)
    try:
        raw = source.read_bytes()
    except FileNotFoundError:
        raise ExperimentConfigError(f"Experiment file not found: {source}")
    except PermissionError:
        raise ExperimentConfigError(f"Cannot read experiment file {source}: permission denied")
    try:
        data = orjson.loads(raw) if source.suffix == ".json" else yaml.safe_load(raw)
    except (orjson.JSONDecodeError, yaml.YAMLError) as e:
        raise ExperimentConfigError(f"Cannot parse experiment file {source}: {e}")
    if not isinstance(data, dict):
        raise ExperimentConfigError(f"Experiment file {source} must contain a mapping")
    data.pop("settings", None)
    return parse_experiment(data)


def experiment_schema() -> Dict[str, Any]:
    """JSON schema of the experiment config union."""
    return _ADAPTER.json_schema()
