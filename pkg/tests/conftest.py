"""Shared fixtures and independent oracles.

The oracles here intentionally do NOT reuse the package's fast paths:
components come from a plain BFS, LODF from delete-the-line-and-resolve
DC power flows, and Pareto sets from exhaustive enumeration plus a
pairwise domination filter.
"""

from __future__ import annotations

import random

import numpy as np
import pytest

from zoneopt.fitness import Problem
from zoneopt.grid_physics import GridLine, GridModel
from zoneopt.topology import (
    Node,
    NodeKind,
    SubstationProfile,
    UtilityGraph,
)


def make_graph(utility_id, sub_ids, edges, ucc_id=None, profiles=None):
    """Build a UtilityGraph from short-hand node/edge lists."""
    ucc_id = ucc_id or f"{utility_id}_UCC"
    nodes = [Node(id=ucc_id, kind=NodeKind.UCC)]
    for i, sid in enumerate(sub_ids):
        prof = (profiles or {}).get(sid) or SubstationProfile(
            n_iso=1 + (i % 3), n_cb=1 + ((2 * i) % 4), n_xline=i % 3, n_xfmr=(i + 1) % 2
        )
        nodes.append(Node(id=sid, kind=NodeKind.SUBSTATION, profile=prof))
    return UtilityGraph(id=utility_id, ucc_id=ucc_id, nodes=tuple(nodes), edges=tuple(edges))


def random_connected_graph(n_subs, n_extra, seed, utility_id="T01"):
    """UCC + n_subs substations: random spanning tree plus n_extra extra edges."""
    rng = random.Random(seed)
    subs = [f"{utility_id}_S{i:02d}" for i in range(1, n_subs + 1)]
    ucc = f"{utility_id}_UCC"
    all_ids = [ucc] + subs
    edges = set()
    for j in range(1, len(all_ids)):
        edges.add(tuple(sorted((all_ids[rng.randrange(j)], all_ids[j]))))
    candidates = [
        tuple(sorted((a, b)))
        for i, a in enumerate(all_ids)
        for b in all_ids[i + 1 :]
        if tuple(sorted((a, b))) not in edges
    ]
    rng.shuffle(candidates)
    for e in candidates[:n_extra]:
        edges.add(e)
    return make_graph(utility_id, subs, sorted(edges), ucc_id=ucc)


def bfs_components(node_ids, edges):
    """Independent connected-components oracle (plain BFS)."""
    adj = {n: [] for n in node_ids}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    comps = []
    for start in node_ids:
        if start in seen:
            continue
        comp = {start}
        queue = [start]
        seen.add(start)
        while queue:
            cur = queue.pop(0)
            for nb in adj[cur]:
                if nb not in seen:
                    seen.add(nb)
                    comp.add(nb)
                    queue.append(nb)
        comps.append(frozenset(comp))
    return comps


def all_chromosome_bits(length):
    for m in range(2 ** length):
        yield bytes((m >> i) & 1 for i in range(length))


# ---------------------------------------------------------------------------
# DC power-flow oracle


def solve_dc_flows(buses, lines, injections, slack):
    """Nodal DC solve; returns per-line flows. Raises on disconnected systems."""
    idx = {b: i for i, b in enumerate(buses)}
    n = len(buses)
    B = np.zeros((n, n))
    for fb, tb, x in lines:
        b = 1.0 / x
        f, t = idx[fb], idx[tb]
        B[f, f] += b
        B[t, t] += b
        B[f, t] -= b
        B[t, f] -= b
    keep = [i for i in range(n) if i != idx[slack]]
    p = np.array([injections.get(b, 0.0) for b in buses])
    theta = np.zeros(n)
    reduced = B[np.ix_(keep, keep)]
    if np.linalg.matrix_rank(reduced) < len(keep):
        raise np.linalg.LinAlgError("disconnected")
    theta[keep] = np.linalg.solve(reduced, p[keep])
    return [(theta[idx[fb]] - theta[idx[tb]]) / x for fb, tb, x in lines]


def lodf_oracle(grid: GridModel):
    """Delete-line-and-resolve LODF oracle.

    Returns (matrix with NaN for undefined entries, set of islanding line ids).
    """
    lines = [(ln.from_bus, ln.to_bus, ln.x) for ln in grid.lines]
    nl = len(lines)
    matrix = np.full((nl, nl), np.nan)
    islanding = set()
    for k, outaged in enumerate(grid.lines):
        # Unit transfer across the outaged line's endpoints guarantees flow on it.
        injections = {outaged.from_bus: 1.0, outaged.to_bus: -1.0}
        pre = solve_dc_flows(grid.buses, lines, injections, grid.slack)
        remaining = lines[:k] + lines[k + 1 :]
        if not _grid_connected(grid.buses, remaining):
            islanding.add(outaged.id)
            continue
        post = solve_dc_flows(grid.buses, remaining, injections, grid.slack)
        post_full = post[:k] + [0.0] + post[k:]
        for l in range(nl):
            if l == k:
                continue
            matrix[l, k] = (post_full[l] - pre[l]) / pre[k]
    return matrix, islanding


def _grid_connected(buses, lines):
    adj = {b: [] for b in buses}
    for fb, tb, _ in lines:
        adj[fb].append(tb)
        adj[tb].append(fb)
    seen = {buses[0]}
    stack = [buses[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(buses)


def random_grid(n_buses, n_extra, seed, sub_ids=None):
    """Random connected grid; buses map 1:1 onto substation ids."""
    rng = random.Random(seed)
    subs = sub_ids or [f"G_S{i:02d}" for i in range(1, n_buses + 1)]
    buses = [f"B_{s}" for s in subs]
    lines = []
    counter = 0

    def add(i, j):
        nonlocal counter
        counter += 1
        lines.append(
            GridLine(
                id=f"L{counter:03d}",
                from_bus=buses[i],
                to_bus=buses[j],
                x=round(rng.uniform(0.05, 0.5), 4),
                from_sub=subs[i],
                to_sub=subs[j],
            )
        )

    for j in range(1, n_buses):
        add(rng.randrange(j), j)
    pairs = [(i, j) for i in range(n_buses) for j in range(i + 1, n_buses)]
    rng.shuffle(pairs)
    for i, j in pairs[:n_extra]:
        add(i, j)
    return GridModel(buses=tuple(buses), slack=buses[0], lines=tuple(lines))


# ---------------------------------------------------------------------------
# Exhaustive Pareto oracle


def enumerate_all(problem: Problem):
    """Evaluate every chromosome; returns {bits: (objectives, violation, n_sg)}."""
    return {bits: problem.evaluate_bits(bits) for bits in all_chromosome_bits(problem.dec_var)}


def _dominates(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def true_front_vectors(full, subset):
    """Deduplicated non-dominated objective vectors among feasible chromosomes."""
    feasible = {
        obj.minimized(subset)
        for obj, viol, _ in full.values()
        if viol.total == 0.0
    }
    return {
        a for a in feasible if not any(_dominates(b, a) for b in feasible if b != a)
    }


def spearman(xs, ys):
    """Spearman rank correlation with average ranks for ties."""

    def ranks(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        out = [0.0] * len(values)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for k in range(i, j + 1):
                out[order[k]] = avg
            i = j + 1
        return out

    rx, ry = ranks(list(xs)), ranks(list(ys))
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    dx = sum((a - mx) ** 2 for a in rx) ** 0.5
    dy = sum((b - my) ** 2 for b in ry) ** 0.5
    if dx == 0 or dy == 0:
        return 0.0
    return num / (dx * dy)


@pytest.fixture
def star4():
    from zoneopt.topology import synth_star

    return synth_star(4)


@pytest.fixture
def fig4_graph():
    """The paper-style 5-node example: UCC7 with substations A-D."""
    return make_graph(
        "U07",
        ["A", "B", "C", "D"],
        [("A", "UCC7"), ("B", "UCC7"), ("D", "UCC7"), ("B", "D"), ("B", "C")],
        ucc_id="UCC7",
    )
