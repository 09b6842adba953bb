"""Acceptance suite: one test per release criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion (pytest itself prints the FAIL lines). The whole suite runs
without the web UI built.
"""

import json
import random
import time
from importlib import resources
from pathlib import Path

import pytest
from click.testing import CliRunner

from zoneopt.cli import main as cli_main
from zoneopt.fitness import ConstraintParams, Problem, count_acls, count_firewalls
from zoneopt.fwgen import audit_counts, emit_clustering, render_config_text
from zoneopt.grid_physics import compute_lodf
from zoneopt.nsga2 import (
    GaParams,
    bitflip_mutation,
    crowding_distance,
    non_dominated_sort,
    run,
)
from zoneopt.orchestrate import (
    RunConfig,
    SynthSpec,
    optimize_system,
    prepare_lodf,
    result_rows,
    synthesize_system,
)
from zoneopt.reporting import compare_baselines, pick_min_cost
from zoneopt.topology import (
    Chromosome,
    Clustering,
    decompose,
    load_topology,
    synth_hybrid,
    synth_star,
)

from conftest import (
    all_chromosome_bits,
    enumerate_all,
    lodf_oracle,
    random_connected_graph,
    random_grid,
    spearman,
    true_front_vectors,
)
from test_nsga2 import ind, oracle_crowding, oracle_fronts


def ok(name, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE PASS: {name}{suffix}")


def clustering_with(ucc_size, detached_sizes):
    subs = [frozenset({"UCC"} | {f"U{i}" for i in range(ucc_size - 1)})]
    counter = 0
    for size in detached_sizes:
        subs.append(frozenset(f"D{counter + i}" for i in range(size)))
        counter += size
    return Clustering(subgraphs=tuple(subs), m_u=1)


def test_01_table3_consistency():
    """Six published (F1, F2) rows reproduced exactly, in under a second."""
    rows = [
        (6, 8, 12, 101),
        (9, 7, 14, 117),
        (12, 6, 16, 133),
        (15, 7, 20, 165),
        (18, 2, 18, 149),
        (21, 15, 34, 277),
    ]
    started = time.perf_counter()
    for n_sg, n1, f1, f2 in rows:
        cl = clustering_with(n1, [1] * (n_sg - 1))
        assert cl.m_u == 1 and cl.n_sg == n_sg
        assert count_firewalls(cl) == f1, (n_sg, count_firewalls(cl), f1)
        assert count_acls(cl) == f2, (n_sg, count_acls(cl), f2)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    ok("Table-III consistency", f"6 rows exact in {elapsed * 1000:.0f} ms")


def test_02_f2_identity_property():
    """F2 == 8*F1 + 5 on 10,000 random single-UCC clusterings."""
    rng = random.Random(8151)
    for _ in range(10_000):
        ucc_size = rng.randint(1, 30)
        detached = [rng.randint(1, 5) for _ in range(rng.randint(0, 25))]
        cl = clustering_with(ucc_size, detached)
        assert count_acls(cl) == 8 * count_firewalls(cl) + 5
    ok("F2 = 8*F1 + 5 identity", "10,000 random clusterings, exact")


def test_03_emission_analytic_identity():
    """Exhaustive chromosome sweep on graphs <= 8 nodes: emitted counts match."""
    graphs = [
        synth_star(1), synth_star(2), synth_star(3), synth_star(4),
        synth_star(5), synth_star(6), synth_star(7),
        synth_hybrid(5, 0.6, seed=12),
        random_connected_graph(6, 3, seed=61, utility_id="E01"),
        random_connected_graph(7, 4, seed=62, utility_id="E02"),
        random_connected_graph(5, 5, seed=63, utility_id="E03"),
    ]
    started = time.perf_counter()
    total = 0
    for graph in graphs:
        assert len(graph.nodes) <= 8
        assert graph.edge_count <= 12
        for i, bits in enumerate(all_chromosome_bits(graph.edge_count)):
            clustering = decompose(graph, Chromosome(bits))
            configs = emit_clustering(clustering, graph)
            report = audit_counts(configs, clustering)
            assert report.ok, report.as_dict()
            assert report.actual_acls == count_acls(clustering)
            assert report.actual_firewalls == count_firewalls(clustering)
            if i % 97 == 0:  # spot-check the rendered text, not just the objects
                rendered = sum(
                    sum(1 for l in render_config_text(c).splitlines()
                        if l.startswith("access-list"))
                    for c in configs
                )
                assert rendered == count_acls(clustering)
            total += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    ok("emission/analytic identity", f"{total} exhaustive clusterings in {elapsed:.1f} s")


def _oracle_fixtures(count=20):
    """Random graphs (<= 12 edges) with grids, as (graph, lodf, params) triples."""
    rng = random.Random(2024)
    out = []
    seed = 0
    while len(out) < count and seed < 80:
        seed += 1
        n_subs = rng.randint(3, 8)
        extra = rng.randint(0, min(5, 12 - n_subs))
        graph = random_connected_graph(n_subs, extra, seed=900 + seed, utility_id=f"A{seed:02d}")
        if graph.edge_count > 12:
            continue
        grid = random_grid(
            len(graph.substation_ids()), 2, seed=800 + seed,
            sub_ids=list(graph.substation_ids()),
        )
        lodf = compute_lodf(grid)
        params = ConstraintParams(p_min=1, p_max=len(graph.nodes), n_p_min=1)
        out.append((seed, graph, lodf, params))
    return out


def test_04_nsga2_oracle_equivalence():
    """Engine front == exhaustive Pareto set on 20 graphs x 4 objective subsets."""
    subsets = [("F1", "F2"), ("F1", "F3"), ("F3", "F4"), ("F1", "F2", "F3", "F4")]
    started = time.perf_counter()
    checked = 0
    for seed, graph, lodf, params in _oracle_fixtures(20):
        base = Problem(graph, params=params, lodf=lodf)
        full = enumerate_all(base)  # 2^|E| evaluations
        for subset in subsets:
            problem = Problem(graph, params=params, lodf=lodf, objectives=subset)
            front = run(
                problem,
                GaParams(
                    population_size=80,
                    max_generations=100,
                    mutation_prob="1/dec_var",
                    seed=1234 + seed,
                ),
            )
            assert front.feasible
            got = {s.objectives.minimized(subset) for s in front.solutions}
            want = true_front_vectors(full, subset)
            assert got == want, (
                f"graph seed {seed}, subset {subset}: missing {want - got}, extra {got - want}"
            )
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0
    ok("NSGA-2 oracle equivalence", f"{checked} runs set-equal in {elapsed:.1f} s")


def test_05_sort_and_crowding_oracles():
    """1,000 random populations: sorting and crowding match pairwise oracles."""
    rng = random.Random(515)
    for trial in range(1_000):
        n_obj = rng.randint(2, 4)
        pop = []
        for i in range(rng.randint(1, 50)):
            key = tuple(rng.randint(0, 8) for _ in range(n_obj))
            violation = rng.choice([0.0, 0.0, 0.0, round(rng.uniform(0.5, 3.0), 3)])
            pop.append(ind(key, violation=violation, bits=bytes([i % 2] * n_obj)))
        got = non_dominated_sort(pop)
        want = oracle_fronts(pop)
        assert [set(map(id, f)) for f in got] == [set(map(id, f)) for f in want]
        front = got[0]
        crowding_distance(front)
        want_crowd = oracle_crowding(front)
        for p in front:
            if want_crowd[id(p)] == float("inf"):
                assert p.crowding == float("inf")
            else:
                assert p.crowding == pytest.approx(want_crowd[id(p)])
    ok("sort/crowding oracle match", "1,000 random populations, exact")


def test_06_lodf_oracle():
    """compute_lodf vs delete-and-resolve on 50 grids; slack invariance 1e-9."""
    import numpy as np

    from zoneopt.grid_physics import GridModel

    rng = random.Random(4242)
    for trial in range(50):
        n_buses = rng.randint(3, 8)
        grid = random_grid(n_buses, rng.randint(0, 4), seed=3000 + trial)
        table = compute_lodf(grid)
        oracle, islanding = lodf_oracle(grid)
        assert table.islanding == frozenset(islanding)
        nl = len(grid.lines)
        for l in range(nl):
            for k in range(nl):
                if l == k or grid.lines[k].id in islanding:
                    continue
                assert abs(table.matrix[l, k] - oracle[l, k]) <= 1e-6
        alt = grid.buses[rng.randrange(1, len(grid.buses))]
        moved = compute_lodf(GridModel(buses=grid.buses, slack=alt, lines=grid.lines))
        assert np.allclose(table.matrix, moved.matrix, atol=1e-9, equal_nan=True)
    ok("LODF oracle + slack invariance", "50 grids within 1e-6 / 1e-9")


def test_07_tradeoff_direction_on_example37():
    """More clusters -> more resilience (F3 up) at more cost (F1 up)."""
    with resources.files("zoneopt.data").joinpath("example37.json").open() as fh:
        system = load_topology(json.load(fh))
    graph = system.utilities[0]
    assert len(graph.nodes) == 38
    lodf = prepare_lodf(system)
    problem = Problem(
        graph, params=ConstraintParams(p_min=2, p_max=40, n_p_min=1), lodf=lodf
    )
    front = run(
        problem,
        GaParams(population_size=150, max_generations=100, mutation_prob="1/dec_var", seed=11),
    )
    assert front.feasible
    assert len(front.solutions) >= 10
    n_sg = [s.n_sg for s in front.solutions]
    rho_f1 = spearman(n_sg, [s.objectives.f1 for s in front.solutions])
    rho_f3 = spearman(n_sg, [s.objectives.f3 for s in front.solutions])
    assert rho_f1 > 0.0
    assert rho_f3 > 0.0
    ok(
        "trade-off direction on example37",
        f"{len(front.solutions)} solutions, rho(n_sg,F1)={rho_f1:.3f}, rho(n_sg,F3)={rho_f3:.3f}",
    )


def _pipeline(tmp_path: Path, tag: str) -> dict[str, bytes]:
    runner = CliRunner()
    base = tmp_path / tag
    topo = base / "topology.json"
    base.mkdir()
    steps = [
        ["synth", "--subs", "6", "--topology", "hybrid", "--edge-prob", "0.3",
         "--seed", "5", "--out", str(topo)],
        ["optimize", "--topology", str(topo), "--out", str(base / "results"),
         "--p-min", "1", "--population", "50", "--generations", "10", "--seed", "3"],
        ["emit", "--result", str(base / "results" / "U01.result.json"),
         "--solution", "min-cost", "--out", str(base / "configs")],
        ["report", "--results", str(base / "results"), "--topology", str(topo),
         "--out", str(base / "reports")],
    ]
    for args in steps:
        res = runner.invoke(cli_main, args)
        assert res.exit_code == 0, (args, res.output)
    files = {}
    for path in sorted(base.rglob("*")):
        if path.is_file() and path.name != "timing.json":  # documented wall-clock sidecar
            files[str(path.relative_to(base))] = path.read_bytes()
    return files


def test_08_determinism_end_to_end(tmp_path):
    """Identical configs produce byte-identical results, configs, and reports."""
    first = _pipeline(tmp_path, "a")
    second = _pipeline(tmp_path, "b")
    assert first.keys() == second.keys()
    diffs = [name for name in first if first[name] != second[name]]
    assert diffs == []
    ok("end-to-end determinism", f"{len(first)} files byte-identical")


def test_09_baseline_direction():
    """10-utility hybrid system: clustered min-cost <= unclustered hybrid."""
    system = synthesize_system(
        SynthSpec(subs=6, utilities=10, topology="hybrid", edge_prob=0.3, seed=7, grid=False)
    )
    config = RunConfig(
        topology_path="unused",
        ga=GaParams(population_size=50, max_generations=25, seed=7),
        objectives=("F1", "F2"),
        constraints=ConstraintParams(p_min=2, p_max=40, n_p_min=1),
    )
    results = optimize_system(system, config)
    assert all(r.feasible for r in results)
    fronts = {r.utility_id: result_rows(r.document) for r in results}
    cmp = compare_baselines(system, fronts, pick_min_cost)
    assert cmp.clustered_f1 <= cmp.hybrid_f1
    assert cmp.clustered_f2 <= cmp.hybrid_f2
    reds = cmp.reductions()
    ok(
        "baseline direction",
        f"clustered F1 {cmp.clustered_f1} <= hybrid {cmp.hybrid_f1}, "
        f"F2 {cmp.clustered_f2} <= {cmp.hybrid_f2} "
        f"(reductions {reds['f1_vs_hybrid']:.1%}/{reds['f2_vs_hybrid']:.1%})",
    )


def test_10_mutation_statistics():
    """Bit flip at p = 1/dec_var averages 1.0 +- 0.1 flips (10,000 trials)."""
    rng = random.Random(424242)
    length = 100
    trials = 10_000
    chromosome = Chromosome.zeros(length)
    total = sum(
        bitflip_mutation(chromosome, 1.0 / length, rng).removed_count()
        for _ in range(trials)
    )
    mean = total / trials
    assert abs(mean - 1.0) <= 0.1
    ok("mutation statistics", f"mean flips {mean:.3f} over {trials} trials")
