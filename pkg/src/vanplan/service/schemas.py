"""Request and response bodies for the planning service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..io import instance_from_mapping, instance_to_mapping, schedule_from_mapping, schedule_to_mapping
from ..model import Instance, Schedule


class ParamsBody(BaseModel):
    exam_duration: int = 30
    max_day: int = 600
    working_days: int = 21


class InstanceBody(BaseModel):
    names: list[str]
    dist_minutes: list[list[int]]
    demand: Optional[list[int]] = None
    yearly_untested_births: Optional[list[int]] = None
    coords: Optional[list[tuple[float, float]]] = None
    params: Optional[ParamsBody] = None

    def to_instance(self) -> Instance:
        return instance_from_mapping(self.model_dump(mode="json", exclude_none=True))

    @classmethod
    def from_instance(cls, instance: Instance) -> "InstanceBody":
        return cls.model_validate(instance_to_mapping(instance))


class TourBody(BaseModel):
    stops: list[int]
    exams: list[int]


class ScheduleBody(BaseModel):
    tours: list[TourBody]
    day_of: list[int]
    van_of: list[int]

    def to_schedule(self) -> Schedule:
        return schedule_from_mapping(self.model_dump(mode="json"))

    @classmethod
    def from_schedule(cls, s: Schedule) -> "ScheduleBody":
        return cls.model_validate(schedule_to_mapping(s))


class SummaryBody(BaseModel):
    tours: int
    vans: int
    travel_minutes: int
    exam_minutes: int
    total_minutes: int


class SolveRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    instance: InstanceBody
    algo: Literal["heuristic", "genetic"] = "heuristic"
    seed: int = 0
    time_limit: float = Field(10.0, gt=0)
    threads: int = Field(1, ge=1)
    # planner knobs
    strategy: Literal[
        "furthest_first", "closest_first", "most_relevant_first", "random"
    ] = "furthest_first"
    score_mode: Literal["ratio", "difference"] = "ratio"
    keep_percent: float = Field(0.20, gt=0.0, le=1.0)
    difference_factor: float = 60.0
    min_exams_per_stop: int = Field(2, ge=1)
    restarts: Optional[int] = Field(None, ge=1)
    sa_runs: int = Field(8, ge=0)
    sa_iterations: int = Field(200000, ge=0)
    # genetic knobs
    mu: int = Field(150, ge=1)
    lam: int = Field(300, ge=1, alias="lambda")
    cx_prob: float = Field(0.6, ge=0.0, le=1.0)
    mut_prob: float = Field(0.2, ge=0.0, le=1.0)
    generations: Optional[int] = Field(None, ge=0)


class SolveResponse(BaseModel):
    schedule: ScheduleBody
    summary: SummaryBody


class ViolationBody(BaseModel):
    kind: str
    detail: str
    tour_index: Optional[int] = None


class ValidateRequest(BaseModel):
    instance: InstanceBody
    schedule: ScheduleBody


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[ViolationBody]


class CompareRequest(BaseModel):
    instance: InstanceBody
    a: ScheduleBody
    b: ScheduleBody


class CompareResponse(BaseModel):
    order: int  # -1: a wins, 0: tie, 1: b wins
    better: Literal["a", "b", "tie"]
    a: SummaryBody
    b: SummaryBody


class GenerateRequest(BaseModel):
    n: int = Field(ge=1)
    seed: int = 0
    births_range: tuple[int, int] = (4, 16)
    speed: float = Field(120.0, gt=0)
    box: tuple[float, float, float, float] = (47.0, 27.0, 47.6, 28.0)
    params: Optional[ParamsBody] = None


class ExportRequest(BaseModel):
    instance: InstanceBody
    schedule: ScheduleBody


class FetchMatrixRequest(BaseModel):
    endpoint: str
    coords: list[tuple[float, float]]
    names: Optional[list[str]] = None
    demand: Optional[list[int]] = None
    yearly_untested_births: Optional[list[int]] = None
