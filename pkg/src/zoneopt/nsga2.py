"""Constrained NSGA-2 over edge-removal chromosomes.

Standard machinery: fast non-dominated sorting with constrained domination
(feasible beats infeasible, lower total violation beats higher, standard
domination among feasible), crowding-distance diversity, binary tournament
selection, k-point crossover, and bit-flip mutation. Fully deterministic
for a fixed seed; fitness evaluations are memoized (the fitness function
is pure).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .fitness import ConstraintViolation, ObjectiveVector, Problem
from .topology import Chromosome

INF = math.inf


@dataclass
class GaParams:
    """Engine knobs; defaults follow the published parameter table."""

    population_size: int = 150
    max_generations: int = 100
    offspring_size: Optional[int] = None  # None -> population_size
    crossover_points: int = 10
    crossover_prob: float = 0.9
    mutation_prob: Union[float, str] = 0.05  # number or "1/dec_var"
    seed: int = 0

    def validate(self):
        if not 50 <= self.population_size <= 200:
            raise ValueError(f"population_size must be in [50, 200], got {self.population_size}")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        if self.offspring_size is not None and not 10 <= self.offspring_size <= 200:
            raise ValueError(f"offspring_size must be in [10, 200], got {self.offspring_size}")
        if not 10 <= self.crossover_points <= 50:
            raise ValueError(f"crossover_points must be in [10, 50], got {self.crossover_points}")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must be in [0, 1]")
        if isinstance(self.mutation_prob, str):
            if self.mutation_prob != "1/dec_var":
                raise ValueError(f"mutation_prob string must be '1/dec_var', got {self.mutation_prob!r}")
        elif not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")

    def effective_offspring(self) -> int:
        return self.population_size if self.offspring_size is None else self.offspring_size

    def mutation_rate(self, dec_var: int) -> float:
        if self.mutation_prob == "1/dec_var":
            return 1.0 / dec_var
        return float(self.mutation_prob)


@dataclass
class Individual:
    chromosome: Chromosome
    objectives: ObjectiveVector
    violation: ConstraintViolation
    key: tuple[float, ...]
    n_sg: int = 1
    rank: int = 0
    crowding: float = 0.0


def constrained_dominates(a: Individual, b: Individual) -> bool:
    """Feasibility-first domination on the minimization-form keys."""
    av, bv = a.violation.total, b.violation.total
    if av == 0.0 and bv > 0.0:
        return True
    if av > 0.0 and bv == 0.0:
        return False
    if av > 0.0 and bv > 0.0:
        return av < bv
    ak, bk = a.key, b.key
    better = False
    for x, y in zip(ak, bk):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def non_dominated_sort(population: Sequence[Individual]) -> list[list[Individual]]:
    """Fast non-dominated sorting; assigns 1-based ranks."""
    if not population:
        raise ValueError("cannot sort an empty population")
    n = len(population)
    dominated: list[list[int]] = [[] for _ in range(n)]
    dom_count = [0] * n
    # Hot path: hoist the per-individual fields once; this loop is O(n^2).
    viols = [p.violation.total for p in population]
    keys = [p.key for p in population]
    for i in range(n):
        vi = viols[i]
        ki = keys[i]
        dom_i = dominated[i]
        for j in range(i + 1, n):
            vj = viols[j]
            if vi == 0.0 and vj == 0.0:
                kj = keys[j]
                if ki == kj:
                    continue
                i_dom = True
                j_dom = True
                for x, y in zip(ki, kj):
                    if x > y:
                        i_dom = False
                        if not j_dom:
                            break
                    elif x < y:
                        j_dom = False
                        if not i_dom:
                            break
                if i_dom:
                    dom_i.append(j)
                    dom_count[j] += 1
                elif j_dom:
                    dominated[j].append(i)
                    dom_count[i] += 1
            elif vi == 0.0 or (vj > 0.0 and vi < vj):
                dom_i.append(j)
                dom_count[j] += 1
            elif vj == 0.0 or vj < vi:
                dominated[j].append(i)
                dom_count[i] += 1

    fronts: list[list[Individual]] = []
    current = [i for i in range(n) if dom_count[i] == 0]
    rank = 1
    while current:
        for i in current:
            population[i].rank = rank
        fronts.append([population[i] for i in current])
        nxt = []
        for i in current:
            for j in dominated[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        current = nxt
        rank += 1
    return fronts


def crowding_distance(front: Sequence[Individual]) -> None:
    """Assign the standard crowding distance in place (boundaries get +inf)."""
    if not front:
        raise ValueError("cannot assign crowding on an empty front")
    for ind in front:
        ind.crowding = 0.0
    if len(front) <= 2:
        for ind in front:
            ind.crowding = INF
        return
    n_obj = len(front[0].key)
    for m in range(n_obj):
        ordered = sorted(front, key=lambda ind: (ind.key[m], ind.chromosome.bits))
        lo, hi = ordered[0].key[m], ordered[-1].key[m]
        ordered[0].crowding = INF
        ordered[-1].crowding = INF
        span = hi - lo
        if span <= 0.0:
            continue
        for i in range(1, len(ordered) - 1):
            if ordered[i].crowding != INF:
                ordered[i].crowding += (ordered[i + 1].key[m] - ordered[i - 1].key[m]) / span


def k_point_crossover(
    a: Chromosome,
    b: Chromosome,
    k: int,
    rng: random.Random,
    prob: float = 1.0,
) -> tuple[Chromosome, Chromosome]:
    """k-point crossover; with probability 1-prob the parents are copied unchanged."""
    if len(a) != len(b):
        raise ValueError("parents must have equal length")
    length = len(a)
    if not 1 <= k <= length - 1:
        raise ValueError(f"crossover points must satisfy 1 <= k <= {length - 1}, got {k}")
    if rng.random() >= prob:
        return a, b
    cuts = sorted(rng.sample(range(1, length), k))
    c1 = bytearray(length)
    c2 = bytearray(length)
    swap = False
    cut_at = set(cuts)
    for i in range(length):
        if i in cut_at:
            swap = not swap
        if swap:
            c1[i] = b.bits[i]
            c2[i] = a.bits[i]
        else:
            c1[i] = a.bits[i]
            c2[i] = b.bits[i]
    return Chromosome(bytes(c1)), Chromosome(bytes(c2))


def bitflip_mutation(c: Chromosome, p: float, rng: random.Random) -> Chromosome:
    """Flip each bit independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("mutation probability must be in [0, 1]")
    out = bytearray(c.bits)
    for i in range(len(out)):
        if rng.random() < p:
            out[i] ^= 1
    return Chromosome(bytes(out))


@dataclass(frozen=True)
class FrontSolution:
    chromosome: Chromosome
    objectives: ObjectiveVector
    violation: ConstraintViolation
    n_sg: int


@dataclass
class RunMetadata:
    evaluations: int = 0
    cache_hits: int = 0
    generations: int = 0
    seed: int = 0
    dec_var: int = 0
    wall_time_s: float = 0.0
    # Per-generation minima of each selected objective (min form) over the
    # feasible population members; None for generations with no feasible one.
    best_history: list = field(default_factory=list)


@dataclass
class ParetoFront:
    solutions: list[FrontSolution]
    feasible: bool
    objectives: tuple[str, ...]
    metadata: RunMetadata


def _tournament(pop: Sequence[Individual], rng: random.Random) -> Individual:
    a = pop[rng.randrange(len(pop))]
    b = pop[rng.randrange(len(pop))]
    ka = (a.rank, -a.crowding, a.chromosome.bits)
    kb = (b.rank, -b.crowding, b.chromosome.bits)
    return a if ka <= kb else b


def run(problem: Problem, params: GaParams) -> ParetoFront:
    """Run the constrained NSGA-2 loop and return the final feasible rank-1 set.

    If no feasible individual exists after the final generation, the
    least-violation front is returned flagged infeasible.
    """
    params.validate()
    length = problem.dec_var
    if length < 1:
        raise ValueError("decision space is empty: the graph has no edges")

    rng = random.Random(params.seed)
    n = params.population_size
    n_off = params.effective_offspring()
    p_mut = params.mutation_rate(length)
    k_cross = min(params.crossover_points, length - 1)  # clip to dec_var - 1
    started = time.perf_counter()

    cache: dict[bytes, tuple[ObjectiveVector, ConstraintViolation, int]] = {}
    meta = RunMetadata(seed=params.seed, dec_var=length)

    def make_individual(ch: Chromosome) -> Individual:
        got = cache.get(ch.bits)
        if got is None:
            got = problem.evaluate_bits(ch.bits)
            cache[ch.bits] = got
            meta.evaluations += 1
        else:
            meta.cache_hits += 1
        obj, viol, n_sg = got
        return Individual(
            chromosome=ch, objectives=obj, violation=viol, key=problem.key(obj), n_sg=n_sg
        )

    # Initial population: per-individual bit density drawn from [0.05, 0.5],
    # biased toward few cuts so early generations are not all-infeasible.
    population: list[Individual] = []
    for _ in range(n):
        density = rng.uniform(0.05, 0.5)
        bits = bytes(1 if rng.random() < density else 0 for _ in range(length))
        population.append(make_individual(Chromosome(bits)))
    for front in non_dominated_sort(population):
        crowding_distance(front)
    _record_best(meta, population)

    def make_offspring(pop: Sequence[Individual]) -> list[Individual]:
        out: list[Individual] = []
        while len(out) < n_off:
            p1 = _tournament(pop, rng)
            p2 = _tournament(pop, rng)
            if length > 1:
                c1, c2 = k_point_crossover(
                    p1.chromosome, p2.chromosome, k_cross, rng, prob=params.crossover_prob
                )
            else:
                c1, c2 = p1.chromosome, p2.chromosome
            for ch in (c1, c2):
                if len(out) < n_off:
                    out.append(make_individual(bitflip_mutation(ch, p_mut, rng)))
        return out

    for _ in range(params.max_generations):
        offspring = make_offspring(population)
        combined = population + offspring
        fronts = non_dominated_sort(combined)
        next_pop: list[Individual] = []
        for front in fronts:
            crowding_distance(front)
            if len(next_pop) + len(front) <= n:
                next_pop.extend(front)
            else:
                overflow = sorted(front, key=lambda ind: (-ind.crowding, ind.chromosome.bits))
                next_pop.extend(overflow[: n - len(next_pop)])
                break
        population = next_pop
        meta.generations += 1
        _record_best(meta, population)

    fronts = non_dominated_sort(population)
    first = fronts[0]
    feasible = [ind for ind in first if ind.violation.total == 0.0]
    chosen = feasible if feasible else first
    seen: set[bytes] = set()
    solutions = []
    for ind in sorted(chosen, key=lambda ind: ind.chromosome.bits):
        if ind.chromosome.bits in seen:
            continue
        seen.add(ind.chromosome.bits)
        solutions.append(
            FrontSolution(
                chromosome=ind.chromosome,
                objectives=ind.objectives,
                violation=ind.violation,
                n_sg=ind.n_sg,
            )
        )
    meta.wall_time_s = time.perf_counter() - started
    return ParetoFront(
        solutions=solutions,
        feasible=bool(feasible),
        objectives=problem.objectives,
        metadata=meta,
    )


def _record_best(meta: RunMetadata, population: Sequence[Individual]) -> None:
    feas = [ind for ind in population if ind.violation.total == 0.0]
    if not feas:
        meta.best_history.append(None)
        return
    n_obj = len(feas[0].key)
    meta.best_history.append(
        tuple(min(ind.key[m] for ind in feas) for m in range(n_obj))
    )
