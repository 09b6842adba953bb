import math
import random

import pytest

from zoneopt.fitness import ConstraintParams, ConstraintViolation, ObjectiveVector, Problem
from zoneopt.nsga2 import (
    GaParams,
    Individual,
    bitflip_mutation,
    crowding_distance,
    k_point_crossover,
    non_dominated_sort,
    run,
)
from zoneopt.topology import Chromosome

from conftest import enumerate_all, make_graph, random_connected_graph, true_front_vectors

INF = math.inf


def ind(key, violation=0.0, bits=None):
    nv = ConstraintViolation(g1=violation, g2=0.0, g3=0.0)
    chrom = Chromosome(bits if bits is not None else bytes(len(key)))
    obj = ObjectiveVector(f1=0, f2=0, f3=0.0, f4=0.0)
    return Individual(chromosome=chrom, objectives=obj, violation=nv, key=tuple(map(float, key)))


def oracle_dominates(a, b):
    """Spelled-out constrained-domination rule, independent of the engine."""
    va, vb = a.violation.total, b.violation.total
    if va == 0.0 and vb > 0.0:
        return True
    if va > 0.0 and vb == 0.0:
        return False
    if va > 0.0 and vb > 0.0:
        return va < vb
    no_worse = all(x <= y for x, y in zip(a.key, b.key))
    strictly_better = any(x < y for x, y in zip(a.key, b.key))
    return no_worse and strictly_better


def oracle_fronts(population):
    """Independent peeling using only pairwise dominance checks."""
    remaining = list(population)
    fronts = []
    while remaining:
        front = [
            p
            for p in remaining
            if not any(oracle_dominates(q, p) for q in remaining if q is not p)
        ]
        fronts.append(front)
        remaining = [p for p in remaining if p not in front]
    return fronts


def oracle_crowding(front):
    """Direct reimplementation of the textbook crowding formula."""
    n = len(front)
    if n <= 2:
        return {id(p): INF for p in front}
    out = {id(p): 0.0 for p in front}
    m_count = len(front[0].key)
    for m in range(m_count):
        ordered = sorted(front, key=lambda p: (p.key[m], p.chromosome.bits))
        out[id(ordered[0])] = INF
        out[id(ordered[-1])] = INF
        span = ordered[-1].key[m] - ordered[0].key[m]
        if span == 0:
            continue
        for i in range(1, n - 1):
            if out[id(ordered[i])] != INF:
                out[id(ordered[i])] += (ordered[i + 1].key[m] - ordered[i - 1].key[m]) / span
    return out


class TestNonDominatedSort:
    def test_mutual_non_domination(self):
        fronts = non_dominated_sort([ind((1, 2)), ind((2, 1))])
        assert len(fronts) == 1
        assert len(fronts[0]) == 2

    def test_three_point_example(self):
        a, b, c = ind((1, 1)), ind((2, 2)), ind((1, 2))
        fronts = non_dominated_sort([a, b, c])
        assert [set(map(id, f)) for f in fronts] == [{id(a)}, {id(c)}, {id(b)}]

    def test_feasible_beats_infeasible(self):
        good = ind((5, 5))
        bad = ind((0, 0), violation=1.0)
        fronts = non_dominated_sort([good, bad])
        assert fronts[0] == [good]
        assert good.rank == 1 and bad.rank == 2

    def test_infeasible_ordered_by_violation(self):
        worse = ind((0, 0), violation=3.0)
        better = ind((9, 9), violation=1.0)
        fronts = non_dominated_sort([worse, better])
        assert fronts[0] == [better]

    def test_empty_population_rejected(self):
        with pytest.raises(ValueError):
            non_dominated_sort([])

    @pytest.mark.parametrize("seed", range(30))
    def test_random_populations_match_peeling_oracle(self, seed):
        rng = random.Random(seed)
        n_obj = rng.randint(2, 4)
        pop = []
        for i in range(rng.randint(1, 50)):
            key = tuple(rng.randint(0, 8) for _ in range(n_obj))
            violation = rng.choice([0.0, 0.0, 0.0, rng.uniform(0.5, 3.0)])
            pop.append(ind(key, violation=violation, bits=bytes([i % 2] * n_obj)))
        got = non_dominated_sort(pop)
        want = oracle_fronts(pop)
        assert [set(map(id, f)) for f in got] == [set(map(id, f)) for f in want]


class TestCrowdingDistance:
    def test_singleton_front(self):
        front = [ind((1, 1))]
        crowding_distance(front)
        assert front[0].crowding == INF

    def test_pair_front(self):
        front = [ind((1, 2)), ind((2, 1))]
        crowding_distance(front)
        assert all(p.crowding == INF for p in front)

    def test_one_dimensional_interior(self):
        a, b, c = ind((1.0,)), ind((2.0,)), ind((4.0,))
        crowding_distance([a, b, c])
        assert a.crowding == INF and c.crowding == INF
        assert b.crowding == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_fronts_match_direct_formula(self, seed):
        rng = random.Random(100 + seed)
        n_obj = rng.randint(2, 4)
        front = [
            ind(
                tuple(rng.randint(0, 6) for _ in range(n_obj)),
                bits=bytes(rng.randint(0, 1) for _ in range(5)),
            )
            for _ in range(rng.randint(1, 40))
        ]
        crowding_distance(front)
        want = oracle_crowding(front)
        for p in front:
            if want[id(p)] == INF:
                assert p.crowding == INF
            else:
                assert p.crowding == pytest.approx(want[id(p)])


class TestCrossover:
    def test_identical_parents_fixed_point(self):
        rng = random.Random(0)
        a = Chromosome.from_string("1010")
        c1, c2 = k_point_crossover(a, a, 2, rng)
        assert c1 == a and c2 == a

    def test_single_cut_documented_example(self):
        # cut after position 2 -> 1100 / 0011
        class FixedRng(random.Random):
            def random(self):
                return 0.0

            def sample(self, population, k):
                return [2]

        c1, c2 = k_point_crossover(
            Chromosome.from_string("1111"), Chromosome.from_string("0000"), 1, FixedRng()
        )
        assert c1.to_string() == "1100"
        assert c2.to_string() == "0011"

    def test_full_cuts_alternate_bits(self):
        rng = random.Random(1)
        a = Chromosome.from_string("11111")
        b = Chromosome.from_string("00000")
        c1, c2 = k_point_crossover(a, b, 4, rng, prob=1.0)
        assert c1.to_string() == "10101"
        assert c2.to_string() == "01010"

    def test_k_out_of_range(self):
        rng = random.Random(0)
        with pytest.raises(ValueError):
            k_point_crossover(Chromosome.zeros(4), Chromosome.zeros(4), 4, rng)

    def test_prob_zero_copies_parents(self):
        rng = random.Random(5)
        a = Chromosome.from_string("1100")
        b = Chromosome.from_string("0011")
        c1, c2 = k_point_crossover(a, b, 2, rng, prob=0.0)
        assert (c1, c2) == (a, b)


class TestMutation:
    def test_p_zero_identity(self):
        rng = random.Random(0)
        c = Chromosome.from_string("0110")
        assert bitflip_mutation(c, 0.0, rng) == c

    def test_p_one_complement(self):
        rng = random.Random(0)
        c = Chromosome.from_string("0110")
        assert bitflip_mutation(c, 1.0, rng).to_string() == "1001"

    def test_expected_flip_rate(self):
        rng = random.Random(42)
        length = 100
        trials = 10_000
        c = Chromosome.zeros(length)
        total = sum(bitflip_mutation(c, 1.0 / length, rng).removed_count() for _ in range(trials))
        assert total / trials == pytest.approx(1.0, abs=0.1)


def small_params(seed=0, pop=50, gens=30):
    return GaParams(
        population_size=pop,
        max_generations=gens,
        offspring_size=None,
        crossover_points=10,
        crossover_prob=0.9,
        mutation_prob="1/dec_var",
        seed=seed,
    )


class TestRun:
    def test_two_node_graph_front(self):
        graph = make_graph("U01", ["U01_S001"], [("U01_S001", "U01_UCC")])
        problem = Problem(
            graph,
            params=ConstraintParams(p_min=1, p_max=4, n_p_min=1),
            objectives=("F1", "F2"),
        )
        front = run(problem, small_params(gens=5))
        full = enumerate_all(problem)
        want = true_front_vectors(full, ("F1", "F2"))
        got = {s.objectives.minimized(("F1", "F2")) for s in front.solutions}
        assert got == want

    def test_star4_cost_objectives_match_exhaustive_oracle(self, star4):
        # On a pure star, F1 = (N1-1) + (Nsg-1) is chromosome-invariant:
        # exhaustive enumeration shows every chromosome scores (4, 37), so the
        # all-zero chromosome is optimal (tied with everything else).
        problem = Problem(
            star4,
            params=ConstraintParams(p_min=1, p_max=10, n_p_min=1),
            objectives=("F1", "F2"),
        )
        front = run(problem, small_params())
        full = enumerate_all(problem)
        want = true_front_vectors(full, ("F1", "F2"))
        assert want == {(4.0, 37.0)}
        assert front.feasible
        got = {s.objectives.minimized(("F1", "F2")) for s in front.solutions}
        assert got == want
        uncut_obj, uncut_viol, _ = problem.evaluate_bits(bytes(4))
        assert uncut_viol.total == 0.0
        assert uncut_obj.minimized(("F1", "F2")) in want

    def test_star4_cost_vs_resilience_front(self, star4):
        # F1 being star-invariant, the F1/F3 front collapses onto the max-F3
        # vector; several chromosomes achieve it (grouping the profile-less
        # UCC with one substation equals isolating everything).
        problem = Problem(
            star4,
            params=ConstraintParams(p_min=1, p_max=10, n_p_min=1),
            objectives=("F1", "F3"),
        )
        front = run(problem, small_params())
        full = enumerate_all(problem)
        want = true_front_vectors(full, ("F1", "F3"))
        got = {s.objectives.minimized(("F1", "F3")) for s in front.solutions}
        assert front.feasible
        assert got == want
        assert len(front.solutions) >= 2
        assert max(s.n_sg for s in front.solutions) >= 4

    def test_identical_seeds_identical_fronts(self):
        graph = random_connected_graph(6, 2, seed=5)
        problem = Problem(graph, params=ConstraintParams(p_min=1, p_max=10))
        a = run(problem, small_params(seed=9))
        b = run(problem, small_params(seed=9))
        assert [s.chromosome.bits for s in a.solutions] == [s.chromosome.bits for s in b.solutions]
        assert a.metadata.evaluations == b.metadata.evaluations
        assert a.metadata.cache_hits == b.metadata.cache_hits

    def test_front_is_single_front_and_feasible(self):
        graph = random_connected_graph(7, 3, seed=6)
        problem = Problem(graph, params=ConstraintParams(p_min=2, p_max=10))
        front = run(problem, small_params(seed=3))
        assert front.feasible
        assert all(s.violation.total == 0.0 for s in front.solutions)
        keys = [s.objectives.minimized(problem.objectives) for s in front.solutions]
        for i, a in enumerate(keys):
            for j, b in enumerate(keys):
                if i != j:
                    assert not (
                        all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))
                    )

    def test_elitism_best_never_worsens(self):
        graph = random_connected_graph(8, 3, seed=17)
        problem = Problem(graph, params=ConstraintParams(p_min=1, p_max=12))
        front = run(problem, small_params(seed=4, gens=40))
        history = [h for h in front.metadata.best_history if h is not None]
        assert history, "no feasible generation recorded"
        for prev, cur in zip(history, history[1:]):
            for p, c in zip(prev, cur):
                assert c <= p + 1e-12

    def test_infeasible_problem_flagged(self):
        # p_min larger than the node count can never be satisfied
        graph = make_graph("U01", ["U01_S001"], [("U01_S001", "U01_UCC")])
        problem = Problem(graph, params=ConstraintParams(p_min=10, p_max=12))
        front = run(problem, small_params(gens=5))
        assert not front.feasible
        assert all(s.violation.total > 0 for s in front.solutions)
        # least-violation front: two nodes can make at most 2 clusters
        assert min(s.violation.total for s in front.solutions) == 8.0

    def test_zero_length_decision_space_rejected(self):
        graph = make_graph("U01", ["U01_S001"], [("U01_S001", "U01_UCC")])
        problem = Problem(graph)
        object.__setattr__  # noqa: B018 - no-op, keep flake quiet
        problem._edges = []
        with pytest.raises(ValueError, match="no edges"):
            run(problem, small_params())

    def test_param_validation(self):
        with pytest.raises(ValueError):
            GaParams(population_size=10).validate()
        with pytest.raises(ValueError):
            GaParams(crossover_points=5).validate()
        with pytest.raises(ValueError):
            GaParams(mutation_prob=1.5).validate()
        with pytest.raises(ValueError):
            GaParams(mutation_prob="1/n").validate()
        GaParams(mutation_prob="1/dec_var").validate()

    def test_population_size_exact_each_generation(self, star4):
        # |P_t+1| == N is implied by the fill logic; verify via a full run on
        # a problem whose combined fronts routinely overflow.
        problem = Problem(star4, params=ConstraintParams(p_min=1, p_max=10))
        params = small_params(seed=2, gens=10)
        front = run(problem, params)
        assert front.metadata.generations == 10
        # duplicates collapsed in the final front only
        bits = [s.chromosome.bits for s in front.solutions]
        assert len(bits) == len(set(bits))
