"""Request and response bodies for the HTTP service."""

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config: dict = Field(description="Simulation config; same shape as a config file")
    seed: int | None = Field(default=None, description="Overrides the config seed")
    until: float | None = Field(default=None, description="Overrides the config duration")


class RunResponse(BaseModel):
    report: dict
    machine_text: str
    human_text: str


class EpochResponse(BaseModel):
    unix_time: float
    T: int
    epoch: int


class ThrResponse(BaseModel):
    network_delay: float
    clock_asynchrony: float
    T: int
    thr: int


class VectorsResponse(BaseModel):
    schema_version: int = Field(alias="schema")
    epoch_example: dict
    cases: list[dict]

    model_config = {"populate_by_name": True}


class DiffRequest(BaseModel):
    first: dict
    second: dict


class DiffResponse(BaseModel):
    equal: bool
    differences: list[str]


class ScenarioListResponse(BaseModel):
    scenarios: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
