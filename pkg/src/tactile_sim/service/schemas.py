"""Request and response bodies for the HTTP endpoints."""

from __future__ import annotations

from pydantic import BaseModel, Field


class EntityIn(BaseModel):
    id: str
    kind: str
    domain: str
    role: str | None = None
    capabilities: list[str] = Field(default_factory=list)
    nmc: bool = True
    dmc: bool = True


class LinkIn(BaseModel):
    id: str
    kind: str
    endpoints: list[str] = Field(min_length=2, max_length=2)


class TopologyIn(BaseModel):
    scenario: int = 1
    entities: list[EntityIn] = Field(default_factory=list)
    links: list[LinkIn] = Field(default_factory=list)

    def as_config(self) -> dict:
        return self.model_dump(exclude_none=True)


class ViolationOut(BaseModel):
    rule: str
    message: str
    subjects: list[str]


class ValidationOut(BaseModel):
    ok: bool
    scenario: int | str | None = None
    violations: list[ViolationOut]


class ClassifyOut(BaseModel):
    scenario: int | str


class RouteRequest(BaseModel):
    topology: TopologyIn
    source: str
    destination: str | None = None
    plane: str = "user"  # "user" needs a destination, "control" does not


class HopOut(BaseModel):
    from_id: str
    to_id: str
    interface: str
    plane: str
    delay_s: float


class RouteOut(BaseModel):
    hops: list[HopOut]
    total_latency_s: float


class ComplianceRequest(BaseModel):
    grade: str
    availability: float = Field(ge=0.0, le=1.0)
    reliability: float = Field(ge=0.0, le=1.0)
    latency_p99_s: float = Field(ge=0.0)
    e2e_budget_s: float = Field(gt=0.0)
    n_devices: int = Field(ge=0)


class MetricOut(BaseModel):
    name: str
    measured: float
    threshold: float
    passed: bool


class ComplianceOut(BaseModel):
    grade: str
    overall_pass: bool
    metrics: list[MetricOut]


class SimulateRequest(BaseModel):
    """Bounded simulation job; large studies belong on the CLI."""

    grade: str = "ultra"
    seed: int = 0
    n_iterations: int = Field(default=20, ge=1, le=200)
    n_packets_per_user: int = Field(default=200, ge=1, le=2000)
    n_users: int = Field(default=10, ge=1, le=100)
    n_small_cells: int = Field(default=4, ge=0, le=20)
    packet_size_bits: int = Field(default=256, ge=1)
    e2e_latency_req_s: float = Field(default=0.005, gt=0.0)


class SimulateOut(BaseModel):
    grade: str
    seed: int
    sum_utility_samples: list[float]
    mean: float
    deciles: list[float]


class GradeOut(BaseModel):
    grade: str
    availability_min: float
    reliability_min: float
    latency_fraction: float
    device_range: tuple[int, int]


class HealthOut(BaseModel):
    status: str
    version: str
