"""Schedule validation and the fleet-first schedule comparator."""

from __future__ import annotations

from dataclasses import dataclass

from .model import Instance, Schedule, route_minutes, vans_required

COVERAGE_MISMATCH = "CoverageMismatch"
DURATION_EXCEEDED = "DurationExceeded"
BAD_INDEX = "BadIndex"
DAY_CLASH = "DayClash"


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    tour_index: int | None = None


def validate_schedule(s: Schedule, instance: Instance) -> list[Violation]:
    """Check a schedule against an instance and return every broken rule.

    An empty result means the plan is valid: every township gets exactly its
    demanded examinations, no tour runs past the daily cap, all indices are in
    range and the day/van assignment uses the minimal fleet without
    double-booking a van.  Coverage is totted up over in-range stops only, so
    one bad index does not cascade into bogus mismatch reports.
    """
    out: list[Violation] = []
    n = instance.n
    params = instance.params
    exam_duration = params.exam_duration

    covered = [0] * (n + 1)
    for t, pt in enumerate(s.tours):
        stops_ok = True
        for stop in pt.tour.stops:
            if not isinstance(stop, int) or isinstance(stop, bool) or not 1 <= stop <= n:
                out.append(Violation(BAD_INDEX, f"stop {stop!r} out of range 1..{n}", t))
                stops_ok = False
        exam_sum = 0
        for j, e in enumerate(pt.exams):
            if not isinstance(e, int) or isinstance(e, bool) or e < 0:
                out.append(Violation(BAD_INDEX, f"exam count {e!r} at stop position {j}", t))
                continue
            exam_sum += e
            st = pt.tour.stops[j]
            if isinstance(st, int) and not isinstance(st, bool) and 1 <= st <= n:
                covered[st] += e
        if stops_ok:
            dur = route_minutes(pt.tour.stops, instance.dist) + exam_duration * exam_sum
            if dur > params.max_day:
                out.append(
                    Violation(
                        DURATION_EXCEEDED,
                        f"tour takes {dur} min, cap is {params.max_day}",
                        t,
                    )
                )

    for i in range(1, n + 1):
        if covered[i] != instance.demand[i]:
            out.append(
                Violation(
                    COVERAGE_MISMATCH,
                    f"township {i} ({instance.names[i]}) gets {covered[i]} of "
                    f"{instance.demand[i]} examinations",
                )
            )

    fleet = vans_required(len(s.tours), params)
    seen: set[tuple[int, int]] = set()
    for t in range(len(s.tours)):
        day, van = s.day_of[t], s.van_of[t]
        if not isinstance(day, int) or isinstance(day, bool) or not 1 <= day <= params.working_days:
            out.append(Violation(BAD_INDEX, f"day {day!r} out of range 1..{params.working_days}", t))
            continue
        if not isinstance(van, int) or isinstance(van, bool) or not 1 <= van <= fleet:
            out.append(Violation(BAD_INDEX, f"van {van!r} out of range 1..{fleet}", t))
            continue
        if (van, day) in seen:
            out.append(Violation(DAY_CLASH, f"van {van} runs two tours on day {day}", t))
        seen.add((van, day))
    return out


def compare_schedules(a: Schedule, b: Schedule, instance: Instance) -> int:
    """Order two valid schedules: fewer tours wins, total minutes break ties.

    Returns -1 if a is better, 1 if b is better, 0 if they tie.  Because every
    valid schedule spends exactly exam_duration * total demand on
    examinations, comparing total durations and comparing total drive times
    give the same order.
    """
    for name, s in (("a", a), ("b", b)):
        bad = validate_schedule(s, instance)
        if bad:
            raise ValueError(f"schedule {name} is invalid: {bad[0].kind}: {bad[0].detail}")
    ka = (len(a.tours), _total_duration(a, instance))
    kb = (len(b.tours), _total_duration(b, instance))
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def _total_duration(s: Schedule, instance: Instance) -> int:
    ed = instance.params.exam_duration
    return sum(
        route_minutes(pt.tour.stops, instance.dist) + ed * sum(pt.exams) for pt in s.tours
    )
