"""Multi-run aggregation: distributions, baseline comparisons, exports.

This module only produces data tables (CSV/JSON); drawing is left to the
web UI or external tools. Baselines compare the optimally clustered cost
against the unclustered star (one firewall per substation) and the
unclustered hybrid (one firewall per substation link, i.e. node degree).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .topology import NodeKind, SystemModel, UtilityGraph


@dataclass
class SolutionRow:
    bits: str
    n_sg: int
    f1: int
    f2: int
    f3: float
    f4: float

    @property
    def fs_metric(self) -> int:
        return self.f1 + self.f2


@dataclass
class RunSummary:
    utility_id: str
    graph_nodes: int
    graph_edges: int
    evaluations: int
    solutions: list[SolutionRow]
    feasible: bool = True
    objectives: tuple[str, ...] = ("F1", "F2", "F3", "F4")
    computation_time_s: Optional[float] = None  # side-channel; never serialized

    @property
    def n_solutions(self) -> int:
        return len(self.solutions)


@dataclass
class HistogramTable:
    bin_edges: list[float]
    counts: list[int]
    underflow: int
    overflow: int

    def as_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges,
            "counts": self.counts,
            "underflow": self.underflow,
            "overflow": self.overflow,
        }


def histogram(values: Sequence[float], bin_edges: Sequence[float]) -> HistogramTable:
    """Counts per half-open bin [e_i, e_i+1); out-of-range values go to under/overflow."""
    edges = list(bin_edges)
    if len(edges) < 2:
        raise ValueError("histogram needs at least two bin edges")
    for a, b in zip(edges, edges[1:]):
        if not a < b:
            raise ValueError("bin edges must be strictly increasing")
    counts = [0] * (len(edges) - 1)
    under = over = 0
    for v in values:
        if v < edges[0]:
            under += 1
        elif v >= edges[-1]:
            over += 1
        else:
            # rightmost bin that starts at or below v
            lo, hi = 0, len(edges) - 2
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if edges[mid] <= v:
                    lo = mid
                else:
                    hi = mid - 1
            counts[lo] += 1
    return HistogramTable(bin_edges=edges, counts=counts, underflow=under, overflow=over)


# ---------------------------------------------------------------------------
# Solution pickers

PickerFn = Callable[[Sequence[SolutionRow]], int]


def pick_min_cost(solutions: Sequence[SolutionRow]) -> int:
    """Index of the minimum F1+F2 solution (ties by bits)."""
    return min(range(len(solutions)), key=lambda i: (solutions[i].fs_metric, solutions[i].bits))


def pick_max_resilience(solutions: Sequence[SolutionRow]) -> int:
    return min(range(len(solutions)), key=lambda i: (-solutions[i].f3, solutions[i].bits))


def pick_knee(
    solutions: Sequence[SolutionRow], objectives: Sequence[str] = ("F1", "F2", "F3", "F4")
) -> int:
    """Max-crowding interior solution; falls back to min cost on tiny fronts."""
    if len(solutions) <= 2:
        return pick_min_cost(solutions)
    sign = {"F1": 1.0, "F2": 1.0, "F3": -1.0, "F4": 1.0}
    keys = []
    for s in solutions:
        vals = {"F1": s.f1, "F2": s.f2, "F3": s.f3, "F4": s.f4}
        keys.append(tuple(sign[o] * vals[o] for o in objectives))
    crowd = [0.0] * len(solutions)
    boundary = [False] * len(solutions)
    for m in range(len(objectives)):
        order = sorted(range(len(solutions)), key=lambda i: (keys[i][m], solutions[i].bits))
        boundary[order[0]] = True
        boundary[order[-1]] = True
        span = keys[order[-1]][m] - keys[order[0]][m]
        if span <= 0:
            continue
        for pos in range(1, len(order) - 1):
            i = order[pos]
            crowd[i] += (keys[order[pos + 1]][m] - keys[order[pos - 1]][m]) / span
    interior = [i for i in range(len(solutions)) if not boundary[i]]
    if not interior:
        return pick_min_cost(solutions)
    return min(interior, key=lambda i: (-crowd[i], solutions[i].bits))


def resolve_picker(rule: str) -> PickerFn:
    if rule == "min-cost":
        return pick_min_cost
    if rule == "max-resilience":
        return pick_max_resilience
    if rule == "knee":
        return pick_knee
    try:
        index = int(rule)
    except ValueError:
        raise ValueError(f"unknown solution selector {rule!r}") from None

    def by_index(solutions: Sequence[SolutionRow]) -> int:
        if not 0 <= index < len(solutions):
            raise ValueError(
                f"solution index {index} out of range (front has {len(solutions)} solutions)"
            )
        return index

    return by_index


def select_solution(
    solutions: Sequence[SolutionRow],
    rule: str,
    objectives: Sequence[str] = ("F1", "F2", "F3", "F4"),
) -> int:
    """Resolve a selector rule against one front; knee honors the run's objective subset."""
    if not solutions:
        raise ValueError("cannot select from an empty front")
    if rule == "knee":
        return pick_knee(solutions, objectives)
    return resolve_picker(rule)(solutions)


# ---------------------------------------------------------------------------
# Baseline comparison


@dataclass
class BaselineComparison:
    star_f1: int
    star_f2: int
    hybrid_f1: int
    hybrid_f2: int
    clustered_f1: int
    clustered_f2: int

    def reductions(self) -> dict:
        def red(base: int, new: int) -> float:
            return (base - new) / base if base else 0.0

        return {
            "f1_vs_star": red(self.star_f1, self.clustered_f1),
            "f2_vs_star": red(self.star_f2, self.clustered_f2),
            "f1_vs_hybrid": red(self.hybrid_f1, self.clustered_f1),
            "f2_vs_hybrid": red(self.hybrid_f2, self.clustered_f2),
        }

    def as_dict(self) -> dict:
        return {
            "star": {"f1": self.star_f1, "f2": self.star_f2},
            "hybrid_unclustered": {"f1": self.hybrid_f1, "f2": self.hybrid_f2},
            "clustered": {"f1": self.clustered_f1, "f2": self.clustered_f2},
            "reductions": self.reductions(),
        }


def _star_counts(n_subs: int) -> tuple[int, int]:
    # Unclustered star: one cluster of n_subs + UCC.
    f1 = n_subs
    f2 = 8 * f1 + 5
    return f1, f2


def _hybrid_unclustered_counts(graph: UtilityGraph) -> tuple[int, int]:
    # One firewall per substation link (degree); each carries a 6-entry block,
    # the UCC keeps 2 rules per substation plus its 5 fixed ones.
    degree = {n.id: 0 for n in graph.nodes}
    for a, b in graph.edges:
        degree[a] += 1
        degree[b] += 1
    subs = [n.id for n in graph.nodes if n.kind is NodeKind.SUBSTATION]
    f1 = sum(degree[s] for s in subs)
    f2 = 6 * f1 + 2 * len(subs) + 5
    return f1, f2


def compare_baselines(
    system: SystemModel,
    fronts: Mapping[str, Sequence[SolutionRow]],
    picker: PickerFn = pick_knee,
) -> BaselineComparison:
    """System-wide F1/F2 of star, unclustered hybrid, and picked clustered solutions."""
    star_f1 = star_f2 = hybrid_f1 = hybrid_f2 = clustered_f1 = clustered_f2 = 0
    for utility in system.utilities:
        if utility.id not in fronts or not fronts[utility.id]:
            raise ValueError(f"missing Pareto front for utility {utility.id!r}")
        n_subs = len(utility.substation_ids())
        s1, s2 = _star_counts(n_subs)
        h1, h2 = _hybrid_unclustered_counts(utility)
        star_f1 += s1
        star_f2 += s2
        hybrid_f1 += h1
        hybrid_f2 += h2
        solutions = list(fronts[utility.id])
        chosen = solutions[picker(solutions)]
        clustered_f1 += chosen.f1
        clustered_f2 += chosen.f2
    return BaselineComparison(
        star_f1=star_f1,
        star_f2=star_f2,
        hybrid_f1=hybrid_f1,
        hybrid_f2=hybrid_f2,
        clustered_f1=clustered_f1,
        clustered_f2=clustered_f2,
    )


# ---------------------------------------------------------------------------
# Export

REPORT_CSV_COLUMNS = [
    "utility_id",
    "graph_nodes",
    "graph_edges",
    "evaluations",
    "solution_index",
    "n_sg",
    "f1",
    "f2",
    "f3",
    "f4",
    "fs_metric",
    "bits",
]


def report_rows(summaries: Sequence[RunSummary]) -> list[dict]:
    rows = []
    for s in summaries:
        for i, sol in enumerate(s.solutions):
            rows.append(
                {
                    "utility_id": s.utility_id,
                    "graph_nodes": s.graph_nodes,
                    "graph_edges": s.graph_edges,
                    "evaluations": s.evaluations,
                    "solution_index": i,
                    "n_sg": sol.n_sg,
                    "f1": sol.f1,
                    "f2": sol.f2,
                    "f3": sol.f3,
                    "f4": sol.f4,
                    "fs_metric": sol.fs_metric,
                    "bits": sol.bits,
                }
            )
    return rows


def report_csv_text(summaries: Sequence[RunSummary]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report_rows(summaries):
        writer.writerow(row)
    return buf.getvalue()


def report_json_doc(summaries: Sequence[RunSummary]) -> dict:
    """Summary document with the distribution tables the result figures use."""
    per_utility = [
        {
            "utility_id": s.utility_id,
            "graph_nodes": s.graph_nodes,
            "graph_edges": s.graph_edges,
            "evaluations": s.evaluations,
            "feasible": s.feasible,
            "n_solutions": s.n_solutions,
            "objectives": list(s.objectives),
            "solutions": [
                {
                    "bits": sol.bits,
                    "n_sg": sol.n_sg,
                    "f1": sol.f1,
                    "f2": sol.f2,
                    "f3": sol.f3,
                    "f4": sol.f4,
                    "fs_metric": sol.fs_metric,
                }
                for sol in s.solutions
            ],
        }
        for s in summaries
    ]

    def dist(values: Sequence[float], width: float) -> dict:
        if not values:
            return histogram([], [0.0, width]).as_dict()
        top = max(values)
        edges = [0.0]
        while edges[-1] <= top:
            edges.append(edges[-1] + width)
        return histogram(values, edges).as_dict()

    sizes = [float(s.graph_nodes) for s in summaries]
    n_solutions = [float(s.n_solutions) for s in summaries]
    clusters = [float(sol.n_sg) for s in summaries for sol in s.solutions]
    f1s = [float(sol.f1) for s in summaries for sol in s.solutions]
    f2s = [float(sol.f2) for s in summaries for sol in s.solutions]
    f3s = [sol.f3 for s in summaries for sol in s.solutions]
    f4s = [sol.f4 for s in summaries for sol in s.solutions]
    return {
        "utilities": per_utility,
        "distributions": {
            "graph_size": dist(sizes, 5.0),
            "pareto_solutions": dist(n_solutions, 5.0),
            "network_clusters": dist(clusters, 3.0),
            "f1": dist(f1s, 5.0),
            "f2": dist(f2s, 25.0),
            "f3": dist(f3s, 1.0),
            "f4": dist(f4s, 0.5),
        },
    }


def export_reports(
    summaries: Sequence[RunSummary],
    outdir: Path,
    comparison: Optional[BaselineComparison] = None,
) -> list[Path]:
    """Write report.csv, report.json and (when available) baselines.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = outdir / "report.csv"
    csv_path.write_text(report_csv_text(summaries), encoding="utf-8")
    written.append(csv_path)
    json_path = outdir / "report.json"
    json_path.write_text(
        json.dumps(report_json_doc(summaries), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    written.append(json_path)
    if comparison is not None:
        base_path = outdir / "baselines.json"
        base_path.write_text(
            json.dumps(comparison.as_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        written.append(base_path)
    return written
