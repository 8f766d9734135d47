"""Pool-based monthly planner.

Covers the month's demand tour by tour: score every pool tour by how
productive it would be right now, draw one of the best, load it with
examinations, repeat until nothing is owed.  Restart with fresh randomness
as long as the time budget allows and keep the best plan seen.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .model import (
    BasicTour,
    InfeasibleInstance,
    Instance,
    InstanceError,
    PlannedTour,
    Schedule,
    assign_days,
    route_minutes,
)
from .rng import stream
from .tourpool import SAParams, build_pool
from .validate import compare_schedules

FURTHEST_FIRST = "furthest_first"
CLOSEST_FIRST = "closest_first"
MOST_RELEVANT_FIRST = "most_relevant_first"
RANDOM_ORDER = "random"
STRATEGIES = (FURTHEST_FIRST, CLOSEST_FIRST, MOST_RELEVANT_FIRST, RANDOM_ORDER)

RATIO = "ratio"
DIFFERENCE = "difference"
SCORE_MODES = (RATIO, DIFFERENCE)


class NoProductiveTour(RuntimeError):
    """No pool tour can host a single further examination."""


@dataclass(frozen=True)
class HeuristicParams:
    strategy: str = FURTHEST_FIRST
    score_mode: str = RATIO
    difference_factor: float = 60.0
    keep_percent: float = 0.20
    min_exams_per_stop: int = 2
    w_tours: float = 1e6
    w_distance: float = 1.0
    w_distinct: float = 100.0
    seed: int = 0
    time_limit: float = 10.0
    restarts: int | None = None  # fixed restart count, for reproducible runs

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InstanceError(f"strategy must be one of {STRATEGIES}")
        if self.score_mode not in SCORE_MODES:
            raise InstanceError(f"score_mode must be one of {SCORE_MODES}")
        if not 0.0 < self.keep_percent <= 1.0:
            raise InstanceError("keep_percent must be in (0, 1]")
        if self.min_exams_per_stop < 1:
            raise InstanceError("min_exams_per_stop must be at least 1")
        if self.w_tours <= 0 or self.w_distance < 0 or self.w_distinct < 0:
            raise InstanceError("weights must be positive (w_tours) / non-negative")
        if self.time_limit <= 0:
            raise InstanceError("time_limit must be positive")
        if self.restarts is not None and self.restarts < 1:
            raise InstanceError("restarts must be at least 1 when set")


def check_feasibility(instance: Instance) -> list[int]:
    """Townships with demand that cannot be served even by a dedicated tour.

    Empty result means every demanded examination fits into some single-stop
    day trip, which is what the planner's termination leans on.
    """
    d = instance.dist
    budget = instance.params.max_day - instance.params.exam_duration
    return [
        i
        for i in range(1, instance.n + 1)
        if instance.demand[i] > 0 and d[0][i] + d[i][0] > budget
    ]


def compute_examinations(
    tour: BasicTour,
    remaining,
    instance: Instance,
    hp: HeuristicParams,
    rng=None,
    min_exams: int | None = None,
) -> list[int]:
    """Examination load per stop if this tour ran right now.

    Stops are filled one at a time, each to the hilt, in the order the
    strategy dictates; the route itself is never shortened or reordered, so
    the whole tour's drive time is paid regardless.  A stop that cannot take
    at least min(min_exams, its remaining demand) examinations takes none,
    which keeps dribs and drabs from spreading across many tours.  Pool tours
    visit each township at most once.
    """
    stops = tour.stops
    dist = instance.dist
    ed = instance.params.exam_duration
    budget = instance.params.max_day - route_minutes(stops, dist)
    if min_exams is None:
        min_exams = hp.min_exams_per_stop
    idxs = list(range(len(stops)))
    if hp.strategy == FURTHEST_FIRST:
        idxs.sort(key=lambda k: -dist[0][stops[k]])
    elif hp.strategy == CLOSEST_FIRST:
        idxs.sort(key=lambda k: dist[0][stops[k]])
    elif hp.strategy == MOST_RELEVANT_FIRST:
        idxs.sort(key=lambda k: (-remaining[stops[k]], -dist[0][stops[k]]))
    else:
        if rng is None:
            raise InstanceError("random strategy needs an rng")
        rng.shuffle(idxs)
    exams = [0] * len(stops)
    for k in idxs:
        if budget < ed:
            break
        s = stops[k]
        take = min(remaining[s], budget // ed)
        if take > 0 and take >= min(min_exams, remaining[s]):
            exams[k] = take
            budget -= take * ed
    return exams


def tour_score(
    tour: BasicTour,
    remaining,
    instance: Instance,
    hp: HeuristicParams,
    rng=None,
    min_exams: int | None = None,
) -> float:
    """Productivity of running this tour now; 0 means it would be wasted."""
    e = sum(compute_examinations(tour, remaining, instance, hp, rng, min_exams))
    if e == 0:
        return 0.0
    d = route_minutes(tour.stops, instance.dist)
    if hp.score_mode == RATIO:
        return e / max(d, 1)  # guard: a zero-drive tour is maximally cheap, not infinite
    return max(0.0, hp.difference_factor * e - d)


def weighted_pick(scores, rng) -> int:
    """Draw an index with probability proportional to its positive score."""
    total = 0.0
    for sc in scores:
        total += sc
    r = rng.random() * total
    acc = 0.0
    for k, sc in enumerate(scores):
        acc += sc
        if r < acc:
            return k
    return len(scores) - 1  # floating-point edge


def choose_tour(pool, remaining, instance: Instance, hp: HeuristicParams, rng) -> BasicTour:
    """Pick the next tour: score all, keep the best slice, draw by score.

    The slice is the top ceil(keep_percent * pool size) entries, at least one;
    zero-score entries are dropped after the cut.  Raises NoProductiveTour if
    nothing in the slice can host an examination.
    """
    scored = [(tour_score(t, remaining, instance, hp, rng), t) for t in pool]
    scored.sort(key=lambda p: -p[0])  # stable, so canonical pool order breaks ties
    keep = max(1, math.ceil(hp.keep_percent * len(scored)))
    top = [(sc, t) for sc, t in scored[:keep] if sc > 0.0]
    if not top:
        raise NoProductiveTour("every candidate tour scored zero")
    k = weighted_pick([sc for sc, _ in top], rng)
    return top[k][1]


def _rescue_tour(pool, remaining, instance, hp, rng):
    # score floor and min-exam rule can zero every tour while demand is still
    # open (tiny leftover capacity, or difference mode on far townships);
    # fall back to whichever tour moves the most examinations
    best = None
    best_e = 0
    for t in pool:
        e = sum(compute_examinations(t, remaining, instance, hp, rng, min_exams=1))
        if e > best_e:
            best_e = e
            best = t
    return best


def generate_planning(pool, instance: Instance, hp: HeuristicParams, rng) -> Schedule:
    """Build one full month plan from the pool; every call consumes rng state.

    Each round picks a productive tour and books as many open examinations on
    it as fit, so total open demand strictly decreases and the loop
    terminates.  Raises NoProductiveTour only if some demanded township has
    no feasible tour at all (ruled out by check_feasibility).
    """
    remaining = list(instance.demand)
    left = sum(remaining)
    plans = []
    while left > 0:
        relaxed = None
        try:
            t = choose_tour(pool, remaining, instance, hp, rng)
        except NoProductiveTour:
            t = _rescue_tour(pool, remaining, instance, hp, rng)
            if t is None:
                raise
            relaxed = 1
        exams = compute_examinations(t, remaining, instance, hp, rng, min_exams=relaxed)
        e = sum(exams)
        if e == 0:
            raise NoProductiveTour("chosen tour lost its capacity on reallocation")
        for k, s in enumerate(t.stops):
            remaining[s] -= exams[k]
        left -= e
        plans.append(PlannedTour(t, tuple(exams)))
    day_of, van_of = assign_days(len(plans), instance.params)
    return Schedule(tuple(plans), day_of, van_of)


def schedule_score(s: Schedule, instance: Instance, hp: HeuristicParams) -> float:
    """Restart-selection objective: tours dominate, then drive, then variety."""
    travel = sum(route_minutes(pt.tour.stops, instance.dist) for pt in s.tours)
    distinct = len({pt.tour.stops for pt in s.tours})
    return hp.w_tours * len(s.tours) + hp.w_distance * travel + hp.w_distinct * distinct


def run_heuristic(
    instance: Instance,
    hp: HeuristicParams | None = None,
    sa: SAParams | None = None,
    threads: int = 1,
    stats: dict | None = None,
) -> Schedule:
    """Full pipeline: feasibility check, pool build, scored restarts.

    Runs generate_planning with fresh derived randomness until the time
    budget runs out (or exactly hp.restarts times) and returns the plan with
    the lowest schedule_score; ties go to the better schedule under
    compare_schedules, then to the earlier restart.  At least one plan is
    always produced, even on a blown budget.
    """
    hp = hp or HeuristicParams()
    sa = sa or SAParams(seed=hp.seed)
    bad = check_feasibility(instance)
    if bad:
        raise InfeasibleInstance(bad)
    total_demand = sum(instance.demand)
    if hp.w_tours <= instance.params.max_day * total_demand:
        raise InstanceError(
            f"w_tours={hp.w_tours} must exceed max_day * total demand "
            f"({instance.params.max_day * total_demand}) to keep tour count dominant"
        )
    deadline = time.monotonic() + hp.time_limit
    pool = build_pool(instance, sa, threads=threads)
    best = None
    best_score = math.inf
    i = 0
    while True:
        rng = stream(hp.seed, 1, i)
        cand = generate_planning(pool, instance, hp, rng)
        sc = schedule_score(cand, instance, hp)
        if (
            best is None
            or sc < best_score
            or (sc == best_score and compare_schedules(cand, best, instance) < 0)
        ):
            best, best_score = cand, sc
        i += 1
        if hp.restarts is not None:
            if i >= hp.restarts:
                break
        elif time.monotonic() >= deadline:
            break
    if stats is not None:
        stats.update(restarts=i, score=best_score, pool_size=len(pool))
    return best
