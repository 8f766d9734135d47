"""Genetic algorithm over examination orderings.

A chromosome is a permutation of all individual examinations; decoding walks
the permutation front to back and greedily cuts it into feasible day tours.
Classic permutation operators (order, partially matched, uniform partially
matched crossover; swap / reverse / shuffle mutation) evolve a mu+lambda
population toward fewer tours, then less driving.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .heuristic import check_feasibility
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

MUTATIONS = ("swap", "reverse", "shuffle")
CROSSOVERS = ("ox", "pmx", "upmx")
UPMX_SWAP_PROB = 1.0 / 3.0


@dataclass(frozen=True)
class ExamIndex:
    """Flat numbering of examinations: township i owns demand[i] consecutive ids."""

    township_of: tuple[int, ...]


def build_exam_index(instance: Instance) -> ExamIndex:
    out: list[int] = []
    for i in range(1, instance.n + 1):
        out.extend([i] * instance.demand[i])
    return ExamIndex(tuple(out))


@dataclass(frozen=True)
class Chromosome:
    """A permutation of 0..len(perm)-1, one gene per examination."""

    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))


@dataclass(frozen=True)
class GAParams:
    mu: int = 150
    lam: int = 300
    cx_prob: float = 0.6
    mut_prob: float = 0.2
    mutation_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)  # swap, reverse, shuffle
    crossover_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)  # ox, pmx, upmx
    tour_factor: int | None = None  # default: max_day * total examinations + 1
    tournament_size: int = 3
    seed: int = 0
    time_limit: float = 10.0
    generations: int | None = None  # fixed generation count, for reproducible runs

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise InstanceError("mu and lam must be at least 1")
        for name in ("cx_prob", "mut_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InstanceError(f"{name} must be in [0, 1]")
        for name in ("mutation_weights", "crossover_weights"):
            w = getattr(self, name)
            if len(w) != 3 or any(x < 0 for x in w) or sum(w) <= 0:
                raise InstanceError(f"{name} needs three non-negative weights, not all zero")
        if self.tournament_size < 1:
            raise InstanceError("tournament_size must be at least 1")
        if self.time_limit <= 0:
            raise InstanceError("time_limit must be positive")
        if self.generations is not None and self.generations < 0:
            raise InstanceError("generations must be non-negative when set")


def greedy_split(c: Chromosome, idx: ExamIndex, instance: Instance) -> list[PlannedTour]:
    """Cut the examination order into day tours, front to back.

    Appending an examination at township u to a tour ending at v extends the
    day by dist[v][u] + exam_duration + dist[u][0] - dist[v][0] (just
    exam_duration when u == v, since dist[u][u] is 0); when the cap would be
    blown the tour closes and a new one opens at u.  Consecutive examinations
    at the same township collapse into one stop.  For a fixed order this uses
    the fewest tours possible; the test suite checks that against an
    exhaustive split oracle.
    """
    dist = instance.dist
    ed = instance.params.exam_duration
    cap = instance.params.max_day
    township_of = idx.township_of
    tours: list[PlannedTour] = []
    stops: list[int] = []
    exams: list[int] = []
    dur = 0
    last = 0
    for g in c.perm:
        u = township_of[g]
        if stops:
            add = dist[last][u] + ed + dist[u][0] - dist[last][0]
            if dur + add <= cap:
                dur += add
                if u == last:
                    exams[-1] += 1
                else:
                    stops.append(u)
                    exams.append(1)
                    last = u
                continue
            tours.append(PlannedTour(BasicTour(tuple(stops)), tuple(exams)))
        add = dist[0][u] + ed + dist[u][0]
        if add > cap:
            raise InfeasibleInstance([u])
        stops = [u]
        exams = [1]
        dur = add
        last = u
    if stops:
        tours.append(PlannedTour(BasicTour(tuple(stops)), tuple(exams)))
    return tours


def mutate_swap(perm, i, j):
    out = list(perm)
    out[i], out[j] = out[j], out[i]
    return tuple(out)


def mutate_reverse(perm, i, j):
    out = list(perm)
    out[i : j + 1] = out[i : j + 1][::-1]
    return tuple(out)


def mutate_shuffle(perm, i, j, rng):
    out = list(perm)
    seg = out[i : j + 1]
    rng.shuffle(seg)
    out[i : j + 1] = seg
    return tuple(out)


def _pick_op(names, weights, rng) -> str:
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for name, w in zip(names, weights):
        acc += w
        if r < acc:
            return name
    return names[-1]


def mutate(c: Chromosome, ga: GAParams, rng) -> Chromosome:
    """Apply one randomly drawn mutation; always returns a permutation."""
    perm = c.perm
    if len(perm) < 2:
        return c
    op = _pick_op(MUTATIONS, ga.mutation_weights, rng)
    i, j = sorted(rng.sample(range(len(perm)), 2))
    if op == "swap":
        return Chromosome(mutate_swap(perm, i, j))
    if op == "reverse":
        return Chromosome(mutate_reverse(perm, i, j))
    return Chromosome(mutate_shuffle(perm, i, j, rng))


def cx_ox(p1, p2, a, b):
    """Order crossover: keep p1[a:b], fill the rest in p2's order from b on."""
    n = len(p1)
    child = [-1] * n
    child[a:b] = p1[a:b]
    used = set(p1[a:b])
    pos = b % n
    for k in range(n):
        g = p2[(b + k) % n]
        if g not in used:
            child[pos] = g
            pos = (pos + 1) % n
    return tuple(child)


def cx_pmx(p1, p2, a, b):
    """Partially matched crossover, pairwise-swap form, on section [a, b).

    For each position k in the section, the value p2[k] is swapped into
    child1 at k (and p1[k] into child2), keeping both children permutations.
    """
    c1, c2 = list(p1), list(p2)
    pos1 = {g: k for k, g in enumerate(c1)}
    pos2 = {g: k for k, g in enumerate(c2)}
    for k in range(a, b):
        g1, g2 = c1[k], c2[k]
        k1 = pos1[g2]
        c1[k], c1[k1] = g2, g1
        pos1[g1], pos1[g2] = k1, k
        k2 = pos2[g1]
        c2[k], c2[k2] = g1, g2
        pos2[g2], pos2[g1] = k2, k
    return tuple(c1), tuple(c2)


def cx_upmx(p1, p2, rng, swap_prob=UPMX_SWAP_PROB):
    """Uniform PMX: the pairwise swap hits each position independently."""
    c1, c2 = list(p1), list(p2)
    pos1 = {g: k for k, g in enumerate(c1)}
    pos2 = {g: k for k, g in enumerate(c2)}
    for k in range(len(c1)):
        if rng.random() >= swap_prob:
            continue
        g1, g2 = c1[k], c2[k]
        k1 = pos1[g2]
        c1[k], c1[k1] = g2, g1
        pos1[g1], pos1[g2] = k1, k
        k2 = pos2[g1]
        c2[k], c2[k2] = g1, g2
        pos2[g2], pos2[g1] = k2, k
    return tuple(c1), tuple(c2)


def crossover(a: Chromosome, b: Chromosome, ga: GAParams, rng) -> tuple[Chromosome, Chromosome]:
    """Apply one randomly drawn crossover; both children are permutations."""
    p1, p2 = a.perm, b.perm
    n = len(p1)
    if n < 2:
        return a, b
    op = _pick_op(CROSSOVERS, ga.crossover_weights, rng)
    if op == "upmx":
        c1, c2 = cx_upmx(p1, p2, rng)
    else:
        i, j = sorted(rng.sample(range(n + 1), 2))
        if op == "ox":
            c1, c2 = cx_ox(p1, p2, i, j), cx_ox(p2, p1, i, j)
        else:
            c1, c2 = cx_pmx(p1, p2, i, j)
    return Chromosome(c1), Chromosome(c2)


def fitness(c: Chromosome, idx: ExamIndex, instance: Instance, ga: GAParams) -> int:
    """Tour count dominates, total drive time breaks ties."""
    tours = greedy_split(c, idx, instance)
    tf = ga.tour_factor
    if tf is None:
        tf = instance.params.max_day * len(idx.township_of) + 1
    travel = sum(route_minutes(pt.tour.stops, instance.dist) for pt in tours)
    return tf * len(tours) + travel


def _tournament(pop, k, rng):
    # pop is sorted by fitness, so the lowest drawn index wins
    best = len(pop)
    for _ in range(k):
        i = rng.randrange(len(pop))
        if i < best:
            best = i
    return pop[best][1]


def evolve(instance: Instance, ga: GAParams):
    """Run the mu+lambda loop; returns (best, best_fitness, history, generations).

    history[g] is the population-best fitness after g generations (entry 0 is
    the initial population); with survivors drawn from parents plus offspring
    it never increases.  Every offspring gets its own random stream derived
    from (seed, generation, index), so results are reproducible.
    """
    bad = check_feasibility(instance)
    if bad:
        raise InfeasibleInstance(bad)
    idx = build_exam_index(instance)
    total = len(idx.township_of)
    deadline = time.monotonic() + ga.time_limit
    if total == 0:
        return Chromosome(()), 0, [0], 0
    init_rng = stream(ga.seed, 0)
    base = list(range(total))
    pop = []
    for _ in range(ga.mu):
        perm = base[:]
        init_rng.shuffle(perm)
        c = Chromosome(tuple(perm))
        pop.append((fitness(c, idx, instance, ga), c))
    pop.sort(key=lambda p: p[0])
    history = [pop[0][0]]
    gen = 0
    while True:
        if ga.generations is not None:
            if gen >= ga.generations:
                break
        elif time.monotonic() >= deadline:
            break
        gen += 1
        offspring = []
        for o in range(ga.lam):
            rng = stream(ga.seed, gen, o)
            if rng.random() < ga.cx_prob:
                pa = _tournament(pop, ga.tournament_size, rng)
                pb = _tournament(pop, ga.tournament_size, rng)
                child, _ = crossover(pa, pb, ga, rng)
            else:
                child = _tournament(pop, ga.tournament_size, rng)
            if rng.random() < ga.mut_prob:
                child = mutate(child, ga, rng)
            offspring.append((fitness(child, idx, instance, ga), child))
        pop = sorted(pop + offspring, key=lambda p: p[0])[: ga.mu]
        history.append(pop[0][0])
    return pop[0][1], pop[0][0], history, gen


def run_ga(instance: Instance, ga: GAParams | None = None, stats: dict | None = None) -> Schedule:
    """Full pipeline: evolve an ordering, split it, spread tours over the month."""
    ga = ga or GAParams()
    best, fit, history, gens = evolve(instance, ga)
    idx = build_exam_index(instance)
    tours = greedy_split(best, idx, instance)
    day_of, van_of = assign_days(len(tours), instance.params)
    if stats is not None:
        stats.update(fitness=fit, generations=gens, history=history)
    return Schedule(tuple(tours), day_of, van_of)
