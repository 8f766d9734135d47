"""Tour pool construction.

Runs simulated annealing on the relaxed problem of partitioning all townships
into feasible day tours (one examination slot per stop), then harvests every
distinct tour seen across independent runs as building blocks for the planner.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .model import BasicTour, InfeasibleInstance, Instance, InstanceError, route_minutes
from .rng import derive_seed

RELOCATE_PROB = 0.4
SWAP_PROB = 0.3  # remainder goes to segment reversal
NEW_TOUR_PROB = 0.05  # chance a relocation opens a fresh tour
PENALTY_FACTOR = 10  # cost of one over-long tour, in units of max_day


@dataclass(frozen=True)
class SAParams:
    runs: int = 8
    initial_temperature: float = 1.0
    cooling_factor: float = 0.995
    iterations_per_run: int = 200000
    seed: int = 0

    def __post_init__(self):
        if self.runs < 0 or self.iterations_per_run < 0:
            raise InstanceError("runs and iterations_per_run must be non-negative")
        if not 0.0 < self.cooling_factor <= 1.0:
            raise InstanceError("cooling_factor must be in (0, 1]")
        if self.initial_temperature < 0.0:
            raise InstanceError("initial_temperature must be non-negative")


@dataclass(frozen=True)
class MtspSolution:
    """A feasible partition of all townships into tours."""

    tours: tuple[BasicTour, ...]

    def __post_init__(self):
        object.__setattr__(self, "tours", tuple(self.tours))
        seen: set[int] = set()
        for t in self.tours:
            for s in t.stops:
                if s in seen:
                    raise InstanceError(f"township {s} appears in two tours")
                seen.add(s)


def unreachable_townships(instance: Instance) -> list[int]:
    """Townships whose round trip plus one examination does not fit in a day."""
    d = instance.dist
    budget = instance.params.max_day - instance.params.exam_duration
    return [i for i in range(1, instance.n + 1) if d[0][i] + d[i][0] > budget]


def sa_solve_mtsp(
    instance: Instance, sa: SAParams, run_seed: int, cost_log: list | None = None
) -> MtspSolution:
    """One annealing run; returns the best feasible partition it saw.

    Moves: relocate a township to another (sometimes fresh) tour, swap two
    townships across tours, reverse a segment within a tour.  Over-long tours
    are allowed in flight but priced at PENALTY_FACTOR * max_day each, and only
    zero-penalty states are eligible as the returned best.
    """
    bad = unreachable_townships(instance)
    if bad:
        raise InfeasibleInstance(bad)
    n = instance.n
    if n == 1:
        return MtspSolution((BasicTour((1,)),))
    dist = instance.dist
    ed = instance.params.exam_duration
    cap = instance.params.max_day
    pen = PENALTY_FACTOR * cap
    rng = random.Random(run_seed)
    rr = rng.random
    exp = math.exp

    # feasible start: random order, packed greedily into tours
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    groups: list[list[int]] = []
    cur = [perm[0]]
    cur_travel = dist[0][perm[0]] + dist[perm[0]][0]
    for u in perm[1:]:
        last = cur[-1]
        t2 = cur_travel - dist[last][0] + dist[last][u] + dist[u][0]
        if t2 + ed * (len(cur) + 1) <= cap:
            cur.append(u)
            cur_travel = t2
        else:
            groups.append(cur)
            cur = [u]
            cur_travel = dist[0][u] + dist[u][0]
    groups.append(cur)

    tours: dict[int, list[int]] = {}
    travel: dict[int, int] = {}
    loc: dict[int, int] = {}
    for tid, g in enumerate(groups):
        tours[tid] = g
        travel[tid] = route_minutes(g, dist)
        for u in g:
            loc[u] = tid
    ids = list(tours)
    next_id = len(groups)
    infeasible: set[int] = set()
    total_travel = sum(travel.values())
    best_travel = total_travel
    best = [tuple(t) for t in tours.values()]

    T = sa.initial_temperature
    cool = sa.cooling_factor
    scale = sum(map(sum, dist)) / (len(dist) ** 2)
    if scale <= 0.0:
        scale = 1.0  # degenerate all-zero matrix
    if cost_log is not None:
        cost_log.append(total_travel)

    def accept(delta) -> bool:
        if delta <= 0:
            return True
        if T <= 0.0:
            return False
        return rr() < exp(-delta / (T * scale))

    def after_accept(dtravel: int):
        nonlocal total_travel, best_travel, best
        total_travel += dtravel
        if not infeasible and total_travel < best_travel:
            best_travel = total_travel
            best = [tuple(t) for t in tours.values()]
        if cost_log is not None:
            cost_log.append(total_travel + pen * len(infeasible))

    for _ in range(sa.iterations_per_run):
        x = rr()
        if x < RELOCATE_PROB:
            u = rng.randrange(1, n + 1)
            src = loc[u]
            src_stops = tours[src]
            k = len(src_stops)
            make_new = False
            dest = -1
            if k > 1 and rr() < NEW_TOUR_PROB:
                make_new = True
            else:
                others = [t for t in ids if t != src]
                if others:
                    dest = others[rng.randrange(len(others))]
                elif k > 1:
                    make_new = True
            if make_new or dest >= 0:
                i = src_stops.index(u)
                prev = src_stops[i - 1] if i > 0 else 0
                nxt = src_stops[i + 1] if i + 1 < k else 0
                d_src = dist[prev][nxt] - dist[prev][u] - dist[u][nxt]
                src_travel_new = travel[src] + d_src
                if make_new:
                    j = 0
                    d_dest = dist[0][u] + dist[u][0]
                    dest_travel_new = d_dest
                    dest_len_new = 1
                    dest_inf_old = False
                else:
                    dest_stops = tours[dest]
                    j = rng.randrange(len(dest_stops) + 1)
                    p = dest_stops[j - 1] if j > 0 else 0
                    q = dest_stops[j] if j < len(dest_stops) else 0
                    d_dest = dist[p][u] + dist[u][q] - dist[p][q]
                    dest_travel_new = travel[dest] + d_dest
                    dest_len_new = len(dest_stops) + 1
                    dest_inf_old = dest in infeasible
                src_inf_new = k > 1 and src_travel_new + ed * (k - 1) > cap
                dest_inf_new = dest_travel_new + ed * dest_len_new > cap
                dpen = (src_inf_new - (src in infeasible)) + (dest_inf_new - dest_inf_old)
                if accept(d_src + d_dest + pen * dpen):
                    src_stops.pop(i)
                    if src_stops:
                        travel[src] = src_travel_new
                        if src_inf_new:
                            infeasible.add(src)
                        else:
                            infeasible.discard(src)
                    else:
                        del tours[src]
                        del travel[src]
                        ids.remove(src)
                        infeasible.discard(src)
                    if make_new:
                        dest = next_id
                        next_id += 1
                        tours[dest] = [u]
                        ids.append(dest)
                    else:
                        tours[dest].insert(j, u)
                    travel[dest] = dest_travel_new
                    if dest_inf_new:
                        infeasible.add(dest)
                    else:
                        infeasible.discard(dest)
                    loc[u] = dest
                    after_accept(d_src + d_dest)
        elif x < RELOCATE_PROB + SWAP_PROB:
            u = rng.randrange(1, n + 1)
            v = rng.randrange(1, n + 1)
            a, b = loc[u], loc[v]
            if a != b:
                astops = tours[a]
                bstops = tours[b]
                i = astops.index(u)
                j = bstops.index(v)
                pa = astops[i - 1] if i > 0 else 0
                na = astops[i + 1] if i + 1 < len(astops) else 0
                pb = bstops[j - 1] if j > 0 else 0
                nb = bstops[j + 1] if j + 1 < len(bstops) else 0
                d_a = dist[pa][v] + dist[v][na] - dist[pa][u] - dist[u][na]
                d_b = dist[pb][u] + dist[u][nb] - dist[pb][v] - dist[v][nb]
                a_new = travel[a] + d_a
                b_new = travel[b] + d_b
                a_inf_new = a_new + ed * len(astops) > cap
                b_inf_new = b_new + ed * len(bstops) > cap
                dpen = (a_inf_new - (a in infeasible)) + (b_inf_new - (b in infeasible))
                if accept(d_a + d_b + pen * dpen):
                    astops[i] = v
                    bstops[j] = u
                    loc[u], loc[v] = b, a
                    travel[a] = a_new
                    travel[b] = b_new
                    if a_inf_new:
                        infeasible.add(a)
                    else:
                        infeasible.discard(a)
                    if b_inf_new:
                        infeasible.add(b)
                    else:
                        infeasible.discard(b)
                    after_accept(d_a + d_b)
        else:
            cands = [t for t in ids if len(tours[t]) >= 2]
            if cands:
                tid = cands[rng.randrange(len(cands))]
                st = tours[tid]
                m = len(st)
                i, j = sorted(rng.sample(range(m), 2))
                prev = st[i - 1] if i > 0 else 0
                nxt = st[j + 1] if j + 1 < m else 0
                old = dist[prev][st[i]] + dist[st[j]][nxt]
                new = dist[prev][st[j]] + dist[st[i]][nxt]
                for k2 in range(i, j):
                    old += dist[st[k2]][st[k2 + 1]]
                    new += dist[st[k2 + 1]][st[k2]]
                d_t = new - old
                t_new = travel[tid] + d_t
                t_inf_new = t_new + ed * m > cap
                dpen = t_inf_new - (tid in infeasible)
                if accept(d_t + pen * dpen):
                    st[i : j + 1] = st[i : j + 1][::-1]
                    travel[tid] = t_new
                    if t_inf_new:
                        infeasible.add(tid)
                    else:
                        infeasible.discard(tid)
                    after_accept(d_t)
        T *= cool

    ordered = sorted(best, key=lambda s: (len(s), s))
    return MtspSolution(tuple(BasicTour(s) for s in ordered))


def build_pool(instance: Instance, sa: SAParams, threads: int = 1) -> list[BasicTour]:
    """Distinct feasible tours from `sa.runs` annealing runs plus all singletons.

    Singletons guarantee the planner can always make progress.  The pool comes
    back in a canonical order (shorter tours first, then lexicographic), so
    identical seeds give identical pools no matter how many threads ran.
    """
    bad = unreachable_townships(instance)
    if bad:
        raise InfeasibleInstance(bad)
    seeds = [derive_seed(sa.seed, r) for r in range(sa.runs)]
    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            sols = list(ex.map(lambda s: sa_solve_mtsp(instance, sa, s), seeds))
    else:
        sols = [sa_solve_mtsp(instance, sa, s) for s in seeds]
    uniq: dict[tuple[int, ...], None] = {}
    for sol in sols:
        for t in sol.tours:
            uniq[t.stops] = None
    for i in range(1, instance.n + 1):
        uniq[(i,)] = None
    ordered = sorted(uniq, key=lambda s: (len(s), s))
    return [BasicTour(s) for s in ordered]
