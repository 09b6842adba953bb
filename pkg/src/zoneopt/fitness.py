"""Objectives and constraints for a candidate zone clustering.

Four objectives: F1 firewall count, F2 ACL count (both minimized), F3
physical-security metric (maximized), F4 cluster-aggregated normalized
LODF (minimized). Internally everything is handled in minimization form
[F1, F2, -F3, F4]. Three constraints bound the cluster count, the minimum
cluster size, and require every detached cluster to contain at least one
node that was a UCC neighbor in the original graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .grid_physics import LodfTable, Weights, ZERO_STD_SENTINEL, nlodf, ps_metric
from .topology import Chromosome, Clustering, SubstationProfile, UtilityGraph, decompose

#: Canonical objective names, index-aligned with ObjectiveVector.minimized().
OBJECTIVE_NAMES = ("F1", "F2", "F3", "F4")


@dataclass(frozen=True)
class ObjectiveVector:
    f1: int
    f2: int
    f3: float
    f4: float

    @property
    def fs_metric(self) -> int:
        """Combined firewall-resource cost F1 + F2."""
        return self.f1 + self.f2

    def minimized(self, subset: Sequence[str] = OBJECTIVE_NAMES) -> tuple[float, ...]:
        """Minimization-form projection (F3 negated) for the given objective subset."""
        full = {"F1": float(self.f1), "F2": float(self.f2), "F3": -self.f3, "F4": self.f4}
        return tuple(full[name] for name in subset)

    def as_dict(self) -> dict:
        return {"f1": self.f1, "f2": self.f2, "f3": self.f3, "f4": self.f4}


@dataclass(frozen=True)
class ConstraintParams:
    """Cluster-count range and minimum nodes per cluster."""

    p_min: int = 2
    p_max: int = 40
    n_p_min: int = 1

    def __post_init__(self):
        if not (1 <= self.p_min <= self.p_max):
            raise ValueError(f"require 1 <= p_min <= p_max, got [{self.p_min}, {self.p_max}]")
        if self.n_p_min < 1:
            raise ValueError("n_p_min must be at least 1")


@dataclass(frozen=True)
class ConstraintViolation:
    g1: float
    g2: float
    g3: float

    @property
    def total(self) -> float:
        return self.g1 + self.g2 + self.g3

    @property
    def feasible(self) -> bool:
        return self.total == 0.0

    def as_dict(self) -> dict:
        return {"g1": self.g1, "g2": self.g2, "g3": self.g3, "total": self.total}


def count_firewalls(clustering: Clustering) -> int:
    """Firewall count: one per substation inside UCC clusters, one per detached cluster."""
    if clustering.m_u < 1:
        raise ValueError("clustering has no UCC cluster")
    ucc_part = sum(clustering.sizes[x] - 1 for x in range(clustering.m_u))
    return ucc_part + (clustering.n_sg - clustering.m_u)


def count_acls(clustering: Clustering) -> int:
    """Total ACL entries: 6 per substation-side block plus the UCC-side rules.

    Substation side: 6(N_x - 1) per UCC cluster, 6 per detached cluster.
    UCC side: 2(N_x - 1) + 5 per UCC cluster, 2 per detached cluster.
    """
    if clustering.m_u < 1:
        raise ValueError("clustering has no UCC cluster")
    m_u, n_sg = clustering.m_u, clustering.n_sg
    ucc_sizes = clustering.sizes[:m_u]
    acl_sub = sum(6 * (n - 1) for n in ucc_sizes) + 6 * (n_sg - m_u)
    acl_ucc = sum(2 * (n - 1) + 5 for n in ucc_sizes) + 2 * (n_sg - m_u)
    return acl_sub + acl_ucc


def f3_security(
    clustering: Clustering,
    profiles: Mapping[str, SubstationProfile],
    weights: Weights,
) -> float:
    """Sum of the per-cluster physical-security metric over aggregated device counts."""
    total = 0.0
    for sub in clustering.subgraphs:
        counts = [0, 0, 0, 0]
        for node in sub:
            prof = profiles.get(node)
            if prof is not None:
                for i, c in enumerate(prof.as_tuple()):
                    counts[i] += c
        total += ps_metric(counts, weights)
    return total


def f4_lodf(clustering: Clustering, lodf: Optional[LodfTable]) -> float:
    """Mean per-cluster NLODF over clusters with intra-cluster outage interactions.

    A line is internal to a cluster when both endpoint substations are in it.
    Per cluster, |LODF[l, k]| is collected over ordered internal pairs (k
    restricted to non-islanding outages); clusters yielding no factors
    contribute nothing, and with no qualifying cluster F4 is 0.
    """
    if lodf is None or len(lodf.line_ids) == 0:
        return 0.0
    member = clustering.membership()
    cluster_lines: dict[int, list[int]] = {}
    for i, lid in enumerate(lodf.line_ids):
        a, b = lodf.endpoints[i]
        ca = member.get(a)
        if ca is not None and ca == member.get(b):
            cluster_lines.setdefault(ca, []).append(i)

    mat = lodf.matrix
    values = []
    for lines in cluster_lines.values():
        if len(lines) < 2:
            continue
        factors = []
        for k in lines:
            if lodf.line_ids[k] in lodf.islanding:
                continue
            for l in lines:
                if l != k:
                    factors.append(abs(float(mat[l, k])))
        if factors:
            values.append(nlodf(factors))
    if not values:
        return 0.0
    return sum(values) / len(values)


def evaluate(
    graph: UtilityGraph,
    chromosome: Chromosome,
    profiles: Optional[Mapping[str, SubstationProfile]] = None,
    weights: Weights = Weights(),
    lodf: Optional[LodfTable] = None,
    params: ConstraintParams = ConstraintParams(),
) -> tuple[ObjectiveVector, ConstraintViolation]:
    """Decompose and score one chromosome. Pure and deterministic."""
    clustering = decompose(graph, chromosome)
    if profiles is None:
        profiles = graph.profiles()

    objectives = ObjectiveVector(
        f1=count_firewalls(clustering),
        f2=count_acls(clustering),
        f3=f3_security(clustering, profiles, weights),
        f4=f4_lodf(clustering, lodf),
    )

    n_sg = clustering.n_sg
    g1 = float(max(0, params.p_min - n_sg) + max(0, n_sg - params.p_max))
    g2 = float(sum(max(0, params.n_p_min - n) for n in clustering.sizes))
    ucc_adjacent = graph.ucc_neighbors()
    g3 = 0.0
    for i, sub in enumerate(clustering.subgraphs):
        if i < clustering.m_u:
            continue  # UCC clusters are exempt
        if not sub & ucc_adjacent:
            g3 += 1.0
    return objectives, ConstraintViolation(g1=g1, g2=g2, g3=g3)


class Problem:
    """Pre-indexed evaluation context for one utility graph.

    Semantically identical to :func:`evaluate` (tested as such) but works on
    integer node indices so the genetic engine and the exhaustive oracles can
    afford 2^|E| sweeps.
    """

    def __init__(
        self,
        graph: UtilityGraph,
        params: ConstraintParams = ConstraintParams(),
        weights: Weights = Weights(),
        lodf: Optional[LodfTable] = None,
        objectives: Sequence[str] = OBJECTIVE_NAMES,
    ):
        for name in objectives:
            if name not in OBJECTIVE_NAMES:
                raise ValueError(f"unknown objective {name!r}")
        if len(objectives) < 2:
            raise ValueError("at least two objectives are required")
        self.graph = graph
        self.params = params
        self.weights = weights
        self.lodf = lodf
        self.objectives = tuple(objectives)

        ids = graph.node_ids
        index = {nid: i for i, nid in enumerate(ids)}
        self._n = len(ids)
        self._edges = [(index[a], index[b]) for a, b in graph.edges]
        self._ucc = index[graph.ucc_id]
        self._ucc_adjacent = frozenset(index[n] for n in graph.ucc_neighbors())
        profiles = graph.profiles()
        self._counts = [
            profiles[nid].as_tuple() if nid in profiles else (0, 0, 0, 0) for nid in ids
        ]
        self._weights = weights.as_tuple()

        # Grid lines fully inside this utility, as node-index endpoints.
        self._lines: list[tuple[int, int, int]] = []
        self._absmat: Optional[np.ndarray] = None
        if lodf is not None and len(lodf.line_ids) > 0:
            id_set = set(ids)
            keep = [
                k
                for k, (a, b) in enumerate(lodf.endpoints)
                if a in id_set and b in id_set
            ]
            self._lines = [
                (index[lodf.endpoints[k][0]], index[lodf.endpoints[k][1]], k) for k in keep
            ]
            self._line_outage_ok = [
                lodf.line_ids[k] not in lodf.islanding for k in range(len(lodf.line_ids))
            ]
            self._absmat = np.abs(lodf.matrix)

    @property
    def dec_var(self) -> int:
        return len(self._edges)

    def evaluate_bits(self, bits: bytes) -> tuple[ObjectiveVector, ConstraintViolation, int]:
        """Score raw chromosome bits; returns (objectives, violation, n_sg)."""
        n = self._n
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for bit, (a, b) in zip(bits, self._edges):
            if not bit:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb

        comp_of = [0] * n
        comp_sizes: list[int] = []
        root_to_comp: dict[int, int] = {}
        for v in range(n):
            r = find(v)
            c = root_to_comp.get(r)
            if c is None:
                c = len(comp_sizes)
                root_to_comp[r] = c
                comp_sizes.append(0)
            comp_of[v] = c
            comp_sizes[c] += 1

        n_sg = len(comp_sizes)
        ucc_comp = comp_of[self._ucc]
        n_ucc = comp_sizes[ucc_comp]

        f1 = (n_ucc - 1) + (n_sg - 1)
        acl_sub = 6 * (n_ucc - 1) + 6 * (n_sg - 1)
        acl_ucc = 2 * (n_ucc - 1) + 5 + 2 * (n_sg - 1)
        f2 = acl_sub + acl_ucc

        totals = [[0, 0, 0, 0] for _ in range(n_sg)]
        for v in range(n):
            cv = self._counts[v]
            if cv != (0, 0, 0, 0):
                t = totals[comp_of[v]]
                t[0] += cv[0]
                t[1] += cv[1]
                t[2] += cv[2]
                t[3] += cv[3]
        w = self._weights
        f3 = 0.0
        for t in totals:
            for i in range(4):
                if t[i] > 0:
                    f3 += 1.0 / (w[i] * t[i])

        f4 = 0.0
        if self._absmat is not None and self._lines:
            cluster_lines: dict[int, list[int]] = {}
            for a, b, k in self._lines:
                ca = comp_of[a]
                if ca == comp_of[b]:
                    cluster_lines.setdefault(ca, []).append(k)
            mat = self._absmat
            ok = self._line_outage_ok
            values = []
            for lines in cluster_lines.values():
                if len(lines) < 2:
                    continue
                outages = [k for k in lines if ok[k]]
                if not outages:
                    continue
                if len(lines) >= 12:
                    # Vectorized gather for big clusters; excludes the diagonal.
                    sub = mat[np.ix_(lines, outages)]
                    keep = np.array(lines)[:, None] != np.array(outages)[None, :]
                    vals = sub[keep]
                    if vals.size:
                        mean = float(vals.mean())
                        std = float(vals.std())
                        values.append(ZERO_STD_SENTINEL if std < 1e-12 else mean / std)
                else:
                    factors = []
                    for k in outages:
                        col = mat[:, k]
                        for l in lines:
                            if l != k:
                                factors.append(float(col[l]))
                    if factors:
                        values.append(nlodf(factors))
            if values:
                f4 = sum(values) / len(values)

        p = self.params
        g1 = float(max(0, p.p_min - n_sg) + max(0, n_sg - p.p_max))
        g2 = float(sum(max(0, p.n_p_min - s) for s in comp_sizes))
        reached = [False] * n_sg
        for v in self._ucc_adjacent:
            reached[comp_of[v]] = True
        g3 = float(
            sum(1 for c in range(n_sg) if c != ucc_comp and not reached[c])
        )

        return (
            ObjectiveVector(f1=f1, f2=f2, f3=f3, f4=f4),
            ConstraintViolation(g1=g1, g2=g2, g3=g3),
            n_sg,
        )

    def evaluate(self, chromosome: Chromosome) -> tuple[ObjectiveVector, ConstraintViolation, int]:
        if len(chromosome) != self.dec_var:
            raise ValueError(
                f"chromosome length {len(chromosome)} != decision-variable count {self.dec_var}"
            )
        return self.evaluate_bits(chromosome.bits)

    def key(self, objectives: ObjectiveVector) -> tuple[float, ...]:
        """Minimization-form tuple for the configured objective subset."""
        return objectives.minimized(self.objectives)
