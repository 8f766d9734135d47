"""HTTP surface over the core planner.

Error bodies always carry {"detail": {"code": ..., "message": ...}} so thin
clients can map outcomes without parsing prose: "infeasible" for instances
that cannot be served, "invalid-schedule" for comparisons fed broken plans,
"schema" for documents that do not parse into the model, "network" /
"malformed-response" for table-endpoint trouble.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse

from .. import io as vio
from ..genetic import GAParams, run_ga
from ..heuristic import HeuristicParams, NoProductiveTour, run_heuristic
from ..model import InfeasibleInstance, Instance, InstanceError, Schedule, total_travel, vans_required
from ..tourpool import SAParams
from ..validate import compare_schedules, validate_schedule
from .schemas import (
    CompareRequest,
    CompareResponse,
    ExportRequest,
    FetchMatrixRequest,
    GenerateRequest,
    InstanceBody,
    ScheduleBody,
    SolveRequest,
    SolveResponse,
    SummaryBody,
    ValidateRequest,
    ValidateResponse,
    ViolationBody,
)

app = FastAPI(title="vanplan", version="0.1.0")


def _fail(status: int, code: str, message: str, **extra):
    raise HTTPException(status_code=status, detail={"code": code, "message": message, **extra})


def _instance(body: InstanceBody) -> Instance:
    try:
        return body.to_instance()
    except vio.SchemaError as e:
        _fail(422, "schema", str(e))


def _summary(s: Schedule, instance: Instance) -> SummaryBody:
    travel = total_travel(s, instance)
    exam = instance.params.exam_duration * sum(pt.total_exams for pt in s.tours)
    return SummaryBody(
        tours=len(s.tours),
        vans=vans_required(len(s.tours), instance.params),
        travel_minutes=travel,
        exam_minutes=exam,
        total_minutes=travel + exam,
    )


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/instances/generate", response_model=InstanceBody, response_model_exclude_none=True)
def generate(req: GenerateRequest):
    params = None
    if req.params is not None:
        params = vio.Params(**req.params.model_dump())
    try:
        spec = vio.GenSpec(
            n=req.n,
            seed=req.seed,
            births_range=req.births_range,
            speed=req.speed,
            box=req.box,
            **({"params": params} if params else {}),
        )
        instance = vio.generate_instance(spec)
    except InstanceError as e:
        _fail(422, "schema", str(e))
    return InstanceBody.from_instance(instance)


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest):
    instance = _instance(req.instance)
    try:
        if req.algo == "heuristic":
            hp = HeuristicParams(
                strategy=req.strategy,
                score_mode=req.score_mode,
                difference_factor=req.difference_factor,
                keep_percent=req.keep_percent,
                min_exams_per_stop=req.min_exams_per_stop,
                seed=req.seed,
                time_limit=req.time_limit,
                restarts=req.restarts,
            )
            sa = SAParams(runs=req.sa_runs, iterations_per_run=req.sa_iterations, seed=req.seed)
            sched = run_heuristic(instance, hp, sa, threads=req.threads)
        else:
            ga = GAParams(
                mu=req.mu,
                lam=req.lam,
                cx_prob=req.cx_prob,
                mut_prob=req.mut_prob,
                seed=req.seed,
                time_limit=req.time_limit,
                generations=req.generations,
            )
            sched = run_ga(instance, ga)
    except InfeasibleInstance as e:
        _fail(422, "infeasible", str(e), townships=e.townships)
    except NoProductiveTour as e:
        _fail(422, "infeasible", str(e))
    except InstanceError as e:
        _fail(422, "schema", str(e))
    return SolveResponse(
        schedule=ScheduleBody.from_schedule(sched), summary=_summary(sched, instance)
    )


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest):
    instance = _instance(req.instance)
    try:
        sched = req.schedule.to_schedule()
    except vio.SchemaError as e:
        _fail(422, "schema", str(e))
    violations = validate_schedule(sched, instance)
    return ValidateResponse(
        valid=not violations,
        violations=[
            ViolationBody(kind=v.kind, detail=v.detail, tour_index=v.tour_index)
            for v in violations
        ],
    )


@app.post("/compare", response_model=CompareResponse)
def compare(req: CompareRequest):
    instance = _instance(req.instance)
    try:
        a = req.a.to_schedule()
        b = req.b.to_schedule()
    except vio.SchemaError as e:
        _fail(422, "schema", str(e))
    try:
        order = compare_schedules(a, b, instance)
    except ValueError as e:
        _fail(422, "invalid-schedule", str(e))
    return CompareResponse(
        order=order,
        better="tie" if order == 0 else ("a" if order < 0 else "b"),
        a=_summary(a, instance),
        b=_summary(b, instance),
    )


def _export_inputs(req: ExportRequest):
    instance = _instance(req.instance)
    try:
        sched = req.schedule.to_schedule()
    except vio.SchemaError as e:
        _fail(422, "schema", str(e))
    return instance, sched


@app.post("/export/geojson")
def export_geojson(req: ExportRequest):
    instance, sched = _export_inputs(req)
    try:
        gj = vio.export_geojson(sched, instance)
    except vio.MissingCoordinates as e:
        _fail(422, "missing-coords", str(e))
    return JSONResponse(content=gj, media_type="application/geo+json")


@app.post("/export/html")
def export_html(req: ExportRequest):
    instance, sched = _export_inputs(req)
    try:
        page = vio.export_html(sched, instance)
    except vio.MissingCoordinates as e:
        _fail(422, "missing-coords", str(e))
    return HTMLResponse(content=page)


@app.post("/export/text")
def export_text(req: ExportRequest):
    instance, sched = _export_inputs(req)
    return PlainTextResponse(content=vio.write_schedule_text(sched, instance))


@app.post("/fetch-matrix", response_model=InstanceBody, response_model_exclude_none=True)
def fetch_matrix(req: FetchMatrixRequest):
    try:
        matrix = vio.fetch_distance_matrix(req.endpoint, req.coords)
    except vio.NetworkError as e:
        _fail(502, "network", str(e))
    except vio.MalformedResponse as e:
        _fail(502, "malformed-response", str(e))
    m = len(req.coords)
    names = req.names or (["Depot"] + [f"T{i:03d}" for i in range(1, m)])
    doc = {
        "names": names,
        "dist_minutes": matrix,
        "coords": [list(c) for c in req.coords],
    }
    if req.yearly_untested_births is not None:
        doc["yearly_untested_births"] = req.yearly_untested_births
    else:
        doc["demand"] = req.demand if req.demand is not None else [0] * m
    try:
        instance = vio.instance_from_mapping(doc)
    except vio.SchemaError as e:
        _fail(422, "schema", str(e))
    return InstanceBody.from_instance(instance)
