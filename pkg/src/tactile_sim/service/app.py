"""FastAPI application exposing the library over HTTP.

Topologies travel as JSON bodies in the same shape the YAML configs use;
simulation jobs are size-capped so the service stays responsive.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..arch import (
    TopologyError,
    build_topology,
    classify_scenario,
    validate_topology,
)
from ..grades import Grade, check_thresholds, grade_spec
from ..protocol import RoutingError, accumulate_latency, route_control_plane, route_user_plane
from ..sim import SimConfig, run_monte_carlo, sample_deciles
from . import schemas

app = FastAPI(title="tactile-sim", version=__version__)


def _topology(body: schemas.TopologyIn):
    try:
        return build_topology(body.as_config())
    except TopologyError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def _grade(name: str) -> Grade:
    try:
        return Grade(name.lower())
    except ValueError:
        raise HTTPException(status_code=422, detail=f"unknown grade {name!r}")


@app.get("/health", response_model=schemas.HealthOut)
def health():
    return schemas.HealthOut(status="ok", version=__version__)


@app.post("/validate", response_model=schemas.ValidationOut)
def validate(body: schemas.TopologyIn):
    topology = _topology(body)
    report = validate_topology(topology)
    scenario = classify_scenario(topology) if report.ok else None
    return schemas.ValidationOut(
        ok=report.ok,
        scenario=scenario,
        violations=[schemas.ViolationOut(rule=v.rule, message=v.message,
                                         subjects=list(v.subjects))
                    for v in report.violations],
    )


@app.post("/classify", response_model=schemas.ClassifyOut)
def classify(body: schemas.TopologyIn):
    topology = _topology(body)
    try:
        return schemas.ClassifyOut(scenario=classify_scenario(topology))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/route", response_model=schemas.RouteOut)
def route(body: schemas.RouteRequest):
    topology = _topology(body.topology)
    try:
        if body.plane == "user":
            if body.destination is None:
                raise HTTPException(status_code=422,
                                    detail="user-plane routing needs a destination")
            path = route_user_plane(topology, body.source, body.destination)
        elif body.plane == "control":
            path = route_control_plane(topology, body.source)
        else:
            raise HTTPException(status_code=422,
                                detail=f"unknown plane {body.plane!r}")
    except (RoutingError, KeyError) as exc:
        raise HTTPException(status_code=404, detail=f"no route: {exc}")
    return schemas.RouteOut(
        hops=[schemas.HopOut(from_id=h.from_id, to_id=h.to_id,
                             interface=h.interface.value, plane=h.plane.value,
                             delay_s=h.delay)
              for h in path],
        total_latency_s=accumulate_latency(path),
    )


@app.post("/compliance", response_model=schemas.ComplianceOut)
def compliance(body: schemas.ComplianceRequest):
    spec = grade_spec(_grade(body.grade))
    report = check_thresholds(spec, body.availability, body.reliability,
                              body.latency_p99_s, body.e2e_budget_s,
                              body.n_devices)
    return schemas.ComplianceOut(
        grade=report.grade.value,
        overall_pass=report.overall_pass,
        metrics=[schemas.MetricOut(name=m.name, measured=m.measured,
                                   threshold=m.threshold, passed=m.passed)
                 for m in report.metrics],
    )


@app.post("/simulate", response_model=schemas.SimulateOut)
def simulate(body: schemas.SimulateRequest):
    kwargs = body.model_dump()
    kwargs["grade"] = _grade(kwargs.pop("grade"))
    try:
        cfg = SimConfig(**kwargs)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    run = run_monte_carlo(cfg)
    samples = list(run.sum_utility_samples)
    return schemas.SimulateOut(
        grade=run.grade.value,
        seed=run.seed,
        sum_utility_samples=samples,
        mean=sum(samples) / len(samples),
        deciles=sample_deciles(samples),
    )


@app.get("/grades/{name}", response_model=schemas.GradeOut)
def grade(name: str):
    spec = grade_spec(_grade(name))
    return schemas.GradeOut(
        grade=spec.grade.value,
        availability_min=spec.availability_min,
        reliability_min=spec.reliability_min,
        latency_fraction=spec.latency_fraction,
        device_range=(spec.device_min, spec.device_max),
    )


__all__ = ["app"]
