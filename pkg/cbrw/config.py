"""Run configuration: strict JSON schema built on pydantic"""

import json
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from cbrw.errors import ConfigError, ParseError, SchemaError
from cbrw.malthus import (
    Binary,
    Catalyst,
    CatalyticSystem,
    Deterministic,
    Geometric,
    OffspringLaw,
    Poisson,
    SolverSettings,
)
from cbrw.resolvent import QuadratureSettings
from cbrw.simulate.engine import SimulationCaps
from cbrw.walk.base import JumpLaw, Marginal
from cbrw.walk.laws import AxisComponent, AxisMixture, FiniteSupport, ProductMarginals
from cbrw.walk.marginals import DisplacedPoisson, FiniteList, Rademacher
from cbrw.walk.model import JumpModel, validate_model


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================================================
# Jump laws
# ============================================================================

class RademacherSpec(StrictModel):
    kind: Literal["rademacher"] = "rademacher"

    def build(self) -> Marginal:
        return Rademacher()


class DisplacedPoissonSpec(StrictModel):
    kind: Literal["displaced_poisson"] = "displaced_poisson"
    sigma_plus: float = Field(..., ge=0)
    sigma_minus: float = Field(..., ge=0)
    p_plus: float = Field(0.5, ge=0, le=1)
    p_minus: float = Field(0.5, ge=0, le=1)

    def build(self) -> Marginal:
        return DisplacedPoisson(self.sigma_plus, self.sigma_minus, self.p_plus, self.p_minus)


class FiniteListSpec(StrictModel):
    kind: Literal["finite_list"] = "finite_list"
    values: List[int] = Field(..., min_length=1)
    probs: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def same_length(self) -> "FiniteListSpec":
        if len(self.values) != len(self.probs):
            raise ValueError("values and probs differ in length")
        return self

    def build(self) -> Marginal:
        return FiniteList(self.values, self.probs)


MarginalSpec = Annotated[
    Union[RademacherSpec, DisplacedPoissonSpec, FiniteListSpec], Field(discriminator="kind")
]


class JumpSpec(StrictModel):
    vector: List[int]
    prob: float


class FiniteSupportSpec(StrictModel):
    kind: Literal["finite_support"] = "finite_support"
    jumps: List[JumpSpec] = Field(..., min_length=1)

    def build(self) -> JumpLaw:
        return FiniteSupport([j.vector for j in self.jumps], [j.prob for j in self.jumps])


class ComponentSpec(StrictModel):
    axis: int = Field(..., ge=0)
    weight: float
    marginal: MarginalSpec


class AxisMixtureSpec(StrictModel):
    kind: Literal["axis_mixture"] = "axis_mixture"
    components: List[ComponentSpec] = Field(..., min_length=1)

    def build(self, dimension: int) -> JumpLaw:
        return AxisMixture(
            dimension,
            [AxisComponent(c.axis, c.weight, c.marginal.build()) for c in self.components],
        )


class ProductSpec(StrictModel):
    kind: Literal["product"] = "product"
    marginals: List[MarginalSpec] = Field(..., min_length=1)

    def build(self) -> JumpLaw:
        return ProductMarginals([m.build() for m in self.marginals])


LawSpec = Annotated[
    Union[FiniteSupportSpec, AxisMixtureSpec, ProductSpec], Field(discriminator="kind")
]


class ModelSection(StrictModel):
    """Walk with rate q and jump law"""

    dimension: int = Field(..., ge=1)
    q: float = Field(..., gt=0)
    law: LawSpec
    exponent_bound: float = Field(700.0, gt=0)

    def build(self) -> JumpModel:
        if isinstance(self.law, AxisMixtureSpec):
            law = self.law.build(self.dimension)
        else:
            law = self.law.build()
        return validate_model(self.dimension, self.q, law, self.exponent_bound)


# ============================================================================
# Catalysts
# ============================================================================

class DeterministicSpec(StrictModel):
    kind: Literal["deterministic"] = "deterministic"
    k: int = Field(..., ge=0)

    def build(self) -> OffspringLaw:
        return Deterministic(self.k)


class BinarySpec(StrictModel):
    kind: Literal["binary"] = "binary"
    p0: float = Field(..., ge=0, le=1)

    def build(self) -> OffspringLaw:
        return Binary(self.p0)


class GeometricSpec(StrictModel):
    kind: Literal["geometric"] = "geometric"
    p: float = Field(..., gt=0, le=1)

    def build(self) -> OffspringLaw:
        return Geometric(self.p)


class PoissonSpec(StrictModel):
    kind: Literal["poisson"] = "poisson"
    mu: float = Field(..., ge=0)

    def build(self) -> OffspringLaw:
        return Poisson(self.mu)


OffspringSpec = Annotated[
    Union[DeterministicSpec, BinarySpec, GeometricSpec, PoissonSpec], Field(discriminator="kind")
]


class CatalystSpec(StrictModel):
    position: List[int]
    alpha: float = Field(..., ge=0, lt=1)
    offspring: OffspringSpec

    def build(self) -> Catalyst:
        return Catalyst(tuple(self.position), self.alpha, self.offspring.build())


# ============================================================================
# Solver, front, simulation, verification, output
# ============================================================================

class SolverSection(StrictModel):
    lambda_min: float = Field(1e-8, gt=0)
    quad_tol: float = Field(1e-10, gt=0)
    rho_tol: float = Field(1e-9, gt=0)
    class_margin: float = Field(1e-6, ge=0)
    limit_tol: float = Field(1e-6, gt=0)
    cond_max: float = Field(1e12, gt=1)
    grid_start: Optional[int] = Field(None, ge=8)
    grid_cap: Optional[int] = Field(None, ge=8)
    max_catalysts: int = Field(64, ge=1)
    max_doublings: int = Field(60, ge=1)
    max_bisections: int = Field(200, ge=1)

    def settings(self) -> SolverSettings:
        quadrature = QuadratureSettings(
            quad_tol=self.quad_tol,
            limit_tol=self.limit_tol,
            lambda_min=self.lambda_min,
            grid_start=self.grid_start,
            grid_cap=self.grid_cap,
        )
        return SolverSettings(
            quadrature=quadrature,
            rho_tol=self.rho_tol,
            class_margin=self.class_margin,
            cond_max=self.cond_max,
            max_doublings=self.max_doublings,
            max_bisections=self.max_bisections,
        )


class FrontSection(StrictModel):
    nu: Optional[float] = Field(None, gt=0)
    resolution: Optional[int] = Field(None, ge=4)
    # relative: the level-set tolerance is level_tol_factor * (1 + nu)
    level_tol_factor: float = Field(1e-10, gt=0)

    def resolution_for(self, dimension: int) -> int:
        if self.resolution:
            return self.resolution
        return 720 if dimension <= 2 else 64


class SimulateSection(StrictModel):
    horizon: float = Field(16.0, gt=0)
    checkpoints: Optional[List[float]] = None
    checkpoint_step: float = Field(1.0, gt=0)
    snapshot_times: Optional[List[float]] = None
    runs: int = Field(500, ge=1)
    seed: int = Field(0, ge=0)
    max_population: int = Field(5_000_000, ge=1)
    max_events: int = Field(500_000_000, ge=1)
    fit_window: Optional[Tuple[float, float]] = None
    epsilon_fracs: List[float] = Field(default_factory=lambda: [0.15])
    window_radius: int = Field(10, ge=0)

    def checkpoint_times(self) -> List[float]:
        if self.checkpoints is not None:
            return sorted(self.checkpoints)
        count = int(np.floor(self.horizon / self.checkpoint_step + 1e-9))
        times = [i * self.checkpoint_step for i in range(count + 1)]
        if times[-1] < self.horizon:
            times.append(self.horizon)
        return times

    def snapshot_list(self) -> List[float]:
        return sorted(self.snapshot_times) if self.snapshot_times else [self.horizon]

    def window(self) -> Tuple[float, float]:
        return tuple(self.fit_window) if self.fit_window else (0.5 * self.horizon, self.horizon)

    def caps(self) -> SimulationCaps:
        return SimulationCaps(self.max_population, self.max_events)


class VerifySection(StrictModel):
    checks: Optional[List[str]] = None
    z_limit: float = Field(3.0, gt=0)
    many_to_one_t: float = Field(5.0, ge=0)
    many_to_one_runs: int = Field(100_000, ge=100)
    mgf_runs: int = Field(100_000, ge=100)
    containment_epsilon_frac: float = Field(0.15, gt=0, lt=1)
    attainment_epsilon_frac: float = Field(0.15, gt=0, lt=1)
    outside_limit: float = Field(0.01, gt=0)
    attainment_rate: float = Field(0.95, ge=0, le=1)
    growth_tolerance: float = Field(0.10, gt=0)
    # per-check settings keyed by check id, e.g. {"C1": {"tolerance": 1e-9}}
    options: Dict[str, Dict[str, Union[bool, int, float]]] = Field(default_factory=dict)


class OutputSection(StrictModel):
    format: Literal["csv", "json", "svg"] = "json"
    path: str = "out"


class RunConfig(StrictModel):
    """Validated run configuration"""

    model: ModelSection
    catalysts: List[CatalystSpec] = Field(..., min_length=1)
    start: List[int]
    solver: SolverSection = Field(default_factory=SolverSection)
    front: FrontSection = Field(default_factory=FrontSection)
    simulate: SimulateSection = Field(default_factory=SimulateSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    output: OutputSection = Field(default_factory=OutputSection)

    def build_model(self) -> JumpModel:
        return self.model.build()

    def build_system(self, model: Optional[JumpModel] = None) -> CatalyticSystem:
        model = model or self.build_model()
        return CatalyticSystem(
            model=model,
            catalysts=tuple(c.build() for c in self.catalysts),
            start=tuple(self.start),
        )

    def dump(self) -> dict:
        return self.model_dump(mode="json")


def _check_consistency(config: RunConfig) -> None:
    dimension = config.model.dimension
    if len(config.start) != dimension:
        raise SchemaError(f"expected {dimension} coordinates", "start")
    seen = set()
    for i, catalyst in enumerate(config.catalysts):
        if len(catalyst.position) != dimension:
            raise SchemaError(f"expected {dimension} coordinates", f"catalysts.{i}.position")
        if tuple(catalyst.position) in seen:
            raise SchemaError("duplicate catalyst position", f"catalysts.{i}.position")
        seen.add(tuple(catalyst.position))
    if len(config.catalysts) > config.solver.max_catalysts:
        raise SchemaError(
            f"{len(config.catalysts)} catalysts exceed max_catalysts={config.solver.max_catalysts}",
            "catalysts",
        )
    law = config.model.law
    if isinstance(law, FiniteSupportSpec):
        for i, jump in enumerate(law.jumps):
            if len(jump.vector) != dimension:
                raise SchemaError(
                    f"expected {dimension} coordinates", f"model.law.jumps.{i}.vector"
                )
    elif isinstance(law, AxisMixtureSpec):
        for i, component in enumerate(law.components):
            if component.axis >= dimension:
                raise SchemaError(f"axis must be < {dimension}", f"model.law.components.{i}.axis")
    elif len(law.marginals) != dimension:
        raise SchemaError(f"expected {dimension} marginals", "model.law.marginals")


def validate_config(data: dict) -> RunConfig:
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise SchemaError(first["msg"], key) from e
    _check_consistency(config)
    return config


def parse_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run config"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object", "<root>")
    return validate_config(data)
