"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field


class GaModel(BaseModel):
    population_size: int = 150
    max_generations: int = 100
    offspring_size: Optional[int] = None
    crossover_points: int = 10
    crossover_prob: float = 0.9
    mutation_prob: Union[float, str] = 0.05
    seed: int = 0


class ConstraintsModel(BaseModel):
    p_min: int = 2
    p_max: int = 40
    n_p_min: int = 1


class WeightsModel(BaseModel):
    iso: float = 1.0
    cb: float = 1.0
    xline: float = 1.0
    xfmr: float = 1.0


class SynthModel(BaseModel):
    subs: int
    utilities: int = 1
    topology: str = "star"
    edge_prob: float = 0.15
    seed: int = 0
    grid: bool = True
    grid_extra_line_prob: float = 0.15


class RunRequest(BaseModel):
    """RunConfig over the wire; topology defaults to the server's document."""

    topology: Optional[dict] = None
    synth: Optional[SynthModel] = None
    ga: GaModel = Field(default_factory=GaModel)
    objectives: list[str] = Field(default_factory=lambda: ["F1", "F2", "F3", "F4"])
    constraints: ConstraintsModel = Field(default_factory=ConstraintsModel)
    weights: WeightsModel = Field(default_factory=WeightsModel)
    parallelism: int = 1


class RunCreated(BaseModel):
    id: str


class RunStatus(BaseModel):
    id: str
    status: str  # queued | running | completed | failed
    feasible: Optional[bool] = None
    utilities: list[str] = Field(default_factory=list)
    solutions: Optional[int] = None
    evaluations: Optional[int] = None
    wall_time_s: Optional[float] = None
    error: Optional[str] = None


class HealthResponse(BaseModel):
    status: str = "ok"


class ErrorBody(BaseModel):
    code: str
    message: str
