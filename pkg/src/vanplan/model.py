"""Core data model: instances, tours, schedules and the arithmetic they share.

Index 0 of every per-location vector is the depot (the city the vans start
from); townships are 1..N.  All durations are integer minutes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InstanceError(ValueError):
    """Malformed instance data or an out-of-range index."""


class InfeasibleInstance(ValueError):
    """Some townships can never be serviced within one working day."""

    def __init__(self, townships):
        self.townships = sorted(townships)
        super().__init__(
            "no feasible single-stop tour for townships %s" % (self.townships,)
        )


@dataclass(frozen=True)
class Params:
    """Knobs that define a working month.

    exam_duration: minutes one examination takes.
    max_day: minutes a van may be out on a single day.
    working_days: working days in the planning month.
    """

    exam_duration: int = 30
    max_day: int = 600
    working_days: int = 21

    def __post_init__(self):
        for name in ("exam_duration", "max_day", "working_days"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise InstanceError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class Instance:
    """One month's problem: who needs examinations and how far apart they live.

    names: location names, names[0] is the depot.
    dist: (N+1)x(N+1) drive times in minutes; dist[i][j] need not equal dist[j][i].
    demand: examinations owed per location this month; demand[0] == 0.
    coords: optional (lat, lon) per location, used only for map exports.
    """

    names: tuple[str, ...]
    dist: tuple[tuple[int, ...], ...]
    demand: tuple[int, ...]
    coords: tuple[tuple[float, float], ...] | None = None
    params: Params = field(default_factory=Params)

    def __post_init__(self):
        names = tuple(self.names)
        dist = tuple(tuple(row) for row in self.dist)
        demand = tuple(self.demand)
        coords = None if self.coords is None else tuple(tuple(c) for c in self.coords)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "coords", coords)
        m = len(names)
        if m < 2:
            raise InstanceError("need a depot and at least one township")
        if len(dist) != m or any(len(row) != m for row in dist):
            raise InstanceError(f"dist must be {m}x{m}")
        for i, row in enumerate(dist):
            for j, v in enumerate(row):
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise InstanceError(f"dist[{i}][{j}] must be a non-negative integer")
            if row[i] != 0:
                raise InstanceError(f"dist[{i}][{i}] must be 0")
        if len(demand) != m:
            raise InstanceError(f"demand must have {m} entries")
        if demand[0] != 0:
            raise InstanceError("demand[0] is the depot and must be 0")
        for i, v in enumerate(demand):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InstanceError(f"demand[{i}] must be a non-negative integer")
        if coords is not None:
            if len(coords) != m or any(len(c) != 2 for c in coords):
                raise InstanceError(f"coords must be {m} (lat, lon) pairs")

    @property
    def n(self) -> int:
        """Number of townships (depot excluded)."""
        return len(self.names) - 1


@dataclass(frozen=True)
class BasicTour:
    """An ordered run of township visits; the depot legs are implicit."""

    stops: tuple[int, ...]

    def __post_init__(self):
        stops = tuple(self.stops)
        object.__setattr__(self, "stops", stops)
        if not stops:
            raise InstanceError("a tour must visit at least one township")

    def __len__(self):
        return len(self.stops)


@dataclass(frozen=True)
class PlannedTour:
    """A tour plus how many examinations happen at each of its stops."""

    tour: BasicTour
    exams: tuple[int, ...]

    def __post_init__(self):
        exams = tuple(self.exams)
        object.__setattr__(self, "exams", exams)
        if len(exams) != len(self.tour.stops):
            raise InstanceError("exams must align with the tour's stops")

    @property
    def total_exams(self) -> int:
        return sum(self.exams)


@dataclass(frozen=True)
class Schedule:
    """A month plan: planned tours with the day and van each one runs on."""

    tours: tuple[PlannedTour, ...]
    day_of: tuple[int, ...]
    van_of: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tours", tuple(self.tours))
        object.__setattr__(self, "day_of", tuple(self.day_of))
        object.__setattr__(self, "van_of", tuple(self.van_of))
        if not (len(self.tours) == len(self.day_of) == len(self.van_of)):
            raise InstanceError("tours, day_of and van_of must have equal length")


def derive_monthly_demand(yearly_untested_births: int) -> int:
    """Examinations owed in one month: ceil(yearly_untested_births * 7 / 12)."""
    if not isinstance(yearly_untested_births, int) or yearly_untested_births < 0:
        raise InstanceError("yearly_untested_births must be a non-negative integer")
    return -(-yearly_untested_births * 7 // 12)


def vans_required(num_tours: int, params: Params) -> int:
    """Smallest fleet that can run num_tours tours in one month."""
    if num_tours < 0:
        raise InstanceError("num_tours must be non-negative")
    return -(-num_tours // params.working_days)


def route_minutes(stops, dist) -> int:
    # fast path for solvers: no validation, caller guarantees indices
    prev = 0
    t = 0
    for s in stops:
        t += dist[prev][s]
        prev = s
    return t + dist[prev][0]


def travel_time(tour: BasicTour, instance: Instance) -> int:
    """Drive minutes of a tour: depot -> stops in order -> depot."""
    n = instance.n
    for s in tour.stops:
        if not isinstance(s, int) or isinstance(s, bool) or not 1 <= s <= n:
            raise InstanceError(f"stop {s!r} out of range 1..{n}")
    return route_minutes(tour.stops, instance.dist)


def duration(pt: PlannedTour, instance: Instance) -> int:
    """Total minutes a planned tour occupies: driving plus examination time."""
    for e in pt.exams:
        if not isinstance(e, int) or isinstance(e, bool) or e < 0:
            raise InstanceError(f"exam count {e!r} must be a non-negative integer")
    return travel_time(pt.tour, instance) + instance.params.exam_duration * sum(pt.exams)


def total_travel(s: Schedule, instance: Instance) -> int:
    return sum(travel_time(pt.tour, instance) for pt in s.tours)


def total_duration(s: Schedule, instance: Instance) -> int:
    return sum(duration(pt, instance) for pt in s.tours)


def assign_days(num_tours: int, params: Params) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Spread tours over the month, round robin over days.

    Tour k (0-based) runs on day k % working_days + 1 in van k // working_days + 1,
    so per-day load is balanced within one tour and no van is double-booked.
    """
    d = params.working_days
    day_of = tuple(k % d + 1 for k in range(num_tours))
    van_of = tuple(k // d + 1 for k in range(num_tours))
    return day_of, van_of
