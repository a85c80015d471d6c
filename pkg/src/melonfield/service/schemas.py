"""Pydantic request and response models for the compute service.

The same models validate CLI config documents; unknown keys are rejected
everywhere so a typo never silently changes a run.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

Coupling = Annotated[float, Field(ge=0.0)]
ColorCount = Annotated[int, Field(ge=1)]
TraceIndex = Annotated[int, Field(ge=0)]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelParamsSchema(StrictModel):
    colors: int = Field(ge=1, description="number of colors D")
    size: int = Field(ge=1, description="matrix size N")
    coupling: float = Field(ge=0.0, description="quartic coupling lambda")


class SolverConfigSchema(StrictModel):
    tolerance: float = Field(default=1e-12, gt=0.0)
    max_iterations: int = Field(default=100, ge=1)
    damping: float = Field(default=1.0, gt=0.0, le=1.0)
    mode: Literal["symmetric_ansatz", "full_coupled"] = "symmetric_ansatz"
    seed: int = 0


class ComplexNumber(StrictModel):
    re: float
    im: float


# -- lo -----------------------------------------------------------------


class LoRequest(StrictModel):
    colors: list[ColorCount] = Field(default=[3], min_length=1)
    couplings: list[Coupling] = Field(default=[0.1], min_length=1)


class LoRow(StrictModel):
    colors: int
    coupling: float
    alpha_im: float
    log_z: Optional[float]  # None marks the divergent coupling -> 0 limit
    g2: float


class LoResponse(StrictModel):
    schema_version: str
    config: LoRequest
    rows: list[LoRow]


# -- saddle -------------------------------------------------------------


class SaddleRequest(StrictModel):
    model: ModelParamsSchema
    solver: SolverConfigSchema = SolverConfigSchema()
    histogram_bins: int = Field(default=32, ge=1)


class LawSchema(StrictModel):
    scale: float
    half_width: float


class ComparisonSchema(StrictModel):
    max_deviation: float
    ks_distance: Optional[float]


class HistogramSchema(StrictModel):
    bin_edges: list[float]
    counts: list[int]
    empirical_density: list[float]
    law_density: list[float]


class SaddleResponse(StrictModel):
    schema_version: str
    config: SaddleRequest
    params: ModelParamsSchema
    spectrum: list[list[ComplexNumber]]
    residual_norm: float
    iterations: int
    converged: bool
    law: LawSchema
    comparison: ComparisonSchema
    histogram: HistogramSchema
    summary: str


# -- series -------------------------------------------------------------


class SeriesRequest(StrictModel):
    colors: list[ColorCount] = Field(default=[3], min_length=1)
    order: int = Field(default=12, ge=0, le=64)


class SeriesSchema(StrictModel):
    order: int
    coefficients: list[str]


class SeriesPerColors(StrictModel):
    colors: int
    g2_series: SeriesSchema
    catalan_oracle: SeriesSchema
    equal: bool
    fixed_point: bool


class SeriesResponse(StrictModel):
    schema_version: str
    config: SeriesRequest
    per_colors: list[SeriesPerColors]
    tutte_series: SeriesSchema
    planar_m2: SeriesSchema
    tutte_equals_planar: bool


# -- sd -----------------------------------------------------------------


class QuadratureSettings(StrictModel):
    tolerance: float = Field(default=1e-8, gt=0.0)


class MCSettings(StrictModel):
    chains: int = Field(default=4, ge=1)
    steps: int = Field(default=100_000, ge=10)
    seed: int = 0
    measure_every: Optional[int] = Field(default=None, ge=1)


class FactorizationRequest(StrictModel):
    s: int = Field(ge=0)
    t: int = Field(ge=0)


class SdRequest(StrictModel):
    model: ModelParamsSchema
    ks: list[TraceIndex] = Field(default=[0, 1, 2], min_length=1)
    colors: Optional[list[int]] = None  # None means every color
    estimator: Literal["quadrature", "mc"] = "quadrature"
    quadrature: QuadratureSettings = QuadratureSettings()
    mc: MCSettings = MCSettings()
    include_leading: bool = True
    factorization: Optional[FactorizationRequest] = None
    threads: Optional[int] = Field(default=None, ge=1)


class SdEntrySchema(StrictModel):
    color: int
    k: int
    residual_re: float
    residual_im: float
    scale: float
    normalized: float
    method: str
    std_error: float
    phase_mean: Optional[float]


class FactorizationSchema(StrictModel):
    s: int
    t: int
    connected_re: float
    connected_im: float
    normalized_abs: float
    scale: float
    std_error: float
    phase_mean: Optional[float]


class SdResponse(StrictModel):
    schema_version: str
    config: SdRequest
    alpha: ComplexNumber
    reports: list[SdEntrySchema]
    leading_reports: list[SdEntrySchema]
    factorization: Optional[FactorizationSchema]
    warnings: list[str]


# -- hermite ------------------------------------------------------------


class HermiteModelSchema(StrictModel):
    colors: int = Field(ge=1)
    coupling: float = Field(gt=0.0)


class HermiteRequest(StrictModel):
    size: int = Field(ge=1)
    model: Optional[HermiteModelSchema] = None


class NLOSchema(StrictModel):
    values: list[float]
    law: LawSchema


class HermiteResponse(StrictModel):
    schema_version: str
    config: HermiteRequest
    size: int
    roots: list[float]
    nlo: Optional[NLOSchema]


class ErrorDetail(StrictModel):
    code: str
    message: str
    residual_norm: Optional[float] = None
