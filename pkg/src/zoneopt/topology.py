"""Utility cyber-network graphs: load, synthesize, and decompose.

One optimization unit is a UCC plus its substations as an undirected
connected graph. Edges carry a canonical order — sorted (min id, max id)
pairs — so a chromosome bit position always means the same edge across
runs and serializations. Deleting the bit=1 edges decomposes the graph
into security-zone clusters.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .grid_physics import GridModel, parse_grid, grid_to_document


class TopologyError(ValueError):
    """Raised for documents or graphs that violate the topology rules."""

    def __init__(self, message: str, entity: Optional[str] = None):
        super().__init__(message)
        self.entity = entity


class NodeKind(str, Enum):
    BA = "BA"
    UCC = "UCC"
    SUBSTATION = "Substation"


@dataclass(frozen=True)
class SubstationProfile:
    """Counts of protection devices housed at one substation."""

    n_iso: int = 0
    n_cb: int = 0
    n_xline: int = 0
    n_xfmr: int = 0

    def __post_init__(self):
        for name in ("n_iso", "n_cb", "n_xline", "n_xfmr"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise TopologyError(f"profile count {name} must be a non-negative integer, got {v!r}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_iso, self.n_cb, self.n_xline, self.n_xfmr)


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    profile: Optional[SubstationProfile] = None


EdgeKind = str  # "ucc_sub" | "sub_sub"


@dataclass(frozen=True)
class UtilityGraph:
    """Connected graph of one UCC and its substations.

    ``edges`` is canonical: each pair sorted, the list sorted. ``node_ids``
    is the sorted id tuple used for all index-based bookkeeping.
    """

    id: str
    ucc_id: str
    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        id_set = set(ids)
        if len(id_set) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise TopologyError(f"duplicate node id {dup!r} in utility {self.id!r}", entity=dup)
        uccs = [n for n in self.nodes if n.kind is NodeKind.UCC]
        if len(uccs) != 1 or uccs[0].id != self.ucc_id:
            raise TopologyError(
                f"utility {self.id!r} must contain exactly one UCC node matching ucc_id={self.ucc_id!r}",
                entity=self.ucc_id,
            )
        for n in self.nodes:
            if n.kind is NodeKind.BA:
                raise TopologyError(
                    f"BA node {n.id!r} is not allowed inside a per-utility graph", entity=n.id
                )
            if n.kind is NodeKind.SUBSTATION and n.profile is None:
                raise TopologyError(f"substation {n.id!r} has no device profile", entity=n.id)
            if n.kind is NodeKind.UCC and n.profile is not None:
                raise TopologyError(f"UCC node {n.id!r} must not carry a device profile", entity=n.id)

        canon = []
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise TopologyError(f"self-loop on node {a!r}", entity=a)
            for e in (a, b):
                if e not in id_set:
                    raise TopologyError(f"edge references unknown node {e!r}", entity=e)
            pair = (a, b) if a < b else (b, a)
            if pair in seen:
                raise TopologyError(f"duplicate edge {pair!r}", entity=f"{pair[0]}-{pair[1]}")
            seen.add(pair)
            canon.append(pair)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

        if not self._is_connected():
            raise TopologyError(f"utility graph {self.id!r} is not connected", entity=self.id)

    def _is_connected(self) -> bool:
        if not self.nodes:
            return False
        adj: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        start = self.nodes[0].id
        seen = {start}
        stack = [start]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.nodes)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(n.id for n in self.nodes))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_kind(self, edge: tuple[str, str]) -> EdgeKind:
        return "ucc_sub" if self.ucc_id in edge else "sub_sub"

    def profiles(self) -> dict[str, SubstationProfile]:
        return {n.id: n.profile for n in self.nodes if n.profile is not None}

    def ucc_neighbors(self) -> frozenset[str]:
        out = set()
        for a, b in self.edges:
            if a == self.ucc_id:
                out.add(b)
            elif b == self.ucc_id:
                out.add(a)
        return frozenset(out)

    def substation_ids(self) -> tuple[str, ...]:
        return tuple(sorted(n.id for n in self.nodes if n.kind is NodeKind.SUBSTATION))


@dataclass(frozen=True)
class Chromosome:
    """Bit vector over a graph's canonical edge order; bit=1 removes the edge."""

    bits: bytes

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("chromosome bits must be 0 or 1")

    @classmethod
    def zeros(cls, length: int) -> "Chromosome":
        return cls(bytes(length))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Chromosome":
        return cls(bytes(int(b) for b in bits))

    @classmethod
    def from_string(cls, s: str) -> "Chromosome":
        return cls(bytes(int(c) for c in s))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def flipped(self, i: int) -> "Chromosome":
        ba = bytearray(self.bits)
        ba[i] ^= 1
        return Chromosome(bytes(ba))

    def removed_count(self) -> int:
        return sum(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]


@dataclass(frozen=True)
class Clustering:
    """Connected components after edge removal; UCC components first."""

    subgraphs: tuple[frozenset[str], ...]
    m_u: int

    @property
    def n_sg(self) -> int:
        return len(self.subgraphs)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.subgraphs)

    def membership(self) -> dict[str, int]:
        return {node: i for i, sub in enumerate(self.subgraphs) for node in sub}

    def as_lists(self) -> list[list[str]]:
        return [sorted(s) for s in self.subgraphs]


def decompose(graph: UtilityGraph, chromosome: Chromosome) -> Clustering:
    """Connected components of the graph with every bit=1 edge deleted.

    Components containing the UCC come first; the rest are ordered by their
    smallest node id.
    """
    if len(chromosome) != graph.edge_count:
        raise TopologyError(
            f"chromosome length {len(chromosome)} != edge count {graph.edge_count} "
            f"of utility {graph.id!r}"
        )
    ids = graph.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    parent = list(range(len(ids)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for bit, (a, b) in zip(chromosome.bits, graph.edges):
        if not bit:
            ra, rb = find(index[a]), find(index[b])
            if ra != rb:
                parent[ra] = rb

    groups: dict[int, list[str]] = {}
    for nid in ids:
        groups.setdefault(find(index[nid]), []).append(nid)

    ucc_root = find(index[graph.ucc_id])
    ordered = [frozenset(groups.pop(ucc_root))]
    # ids are sorted, so each group's first element is its smallest id
    ordered.extend(frozenset(g) for g in sorted(groups.values(), key=lambda g: g[0]))
    return Clustering(subgraphs=tuple(ordered), m_u=1)


# ---------------------------------------------------------------------------
# Synthesis


def _default_profile(k: int) -> SubstationProfile:
    # Deterministic per-index variation so the security metric has texture
    # without needing a seed.
    return SubstationProfile(
        n_iso=1 + (k % 4),
        n_cb=1 + ((2 * k) % 5),
        n_xline=k % 3,
        n_xfmr=(k + 1) % 3,
    )


def _sub_id(utility_id: str, k: int) -> str:
    return f"{utility_id}_S{k:03d}"


def synth_star(n_subs: int, utility_id: str = "U01") -> UtilityGraph:
    """Star of n_subs substations around one UCC."""
    if n_subs < 1:
        raise TopologyError("a utility needs at least one substation")
    ucc = f"{utility_id}_UCC"
    nodes = [Node(id=ucc, kind=NodeKind.UCC)]
    edges = []
    for k in range(1, n_subs + 1):
        sid = _sub_id(utility_id, k)
        nodes.append(Node(id=sid, kind=NodeKind.SUBSTATION, profile=_default_profile(k)))
        edges.append((ucc, sid))
    return UtilityGraph(id=utility_id, ucc_id=ucc, nodes=tuple(nodes), edges=tuple(edges))


def synth_hybrid(
    n_subs: int, extra_edge_prob: float, seed: int, utility_id: str = "U01"
) -> UtilityGraph:
    """Star backbone plus seeded random substation-to-substation links."""
    if not 0.0 <= extra_edge_prob <= 1.0:
        raise TopologyError(f"extra_edge_prob must be in [0, 1], got {extra_edge_prob}")
    star = synth_star(n_subs, utility_id=utility_id)
    rng = random.Random(seed)
    subs = [_sub_id(utility_id, k) for k in range(1, n_subs + 1)]
    extra = []
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            if rng.random() < extra_edge_prob:
                extra.append((subs[i], subs[j]))
    return UtilityGraph(
        id=star.id, ucc_id=star.ucc_id, nodes=star.nodes, edges=star.edges + tuple(extra)
    )


# ---------------------------------------------------------------------------
# System documents


@dataclass(frozen=True)
class SystemModel:
    """All utilities of one system plus the (optional) shared physical grid."""

    utilities: tuple[UtilityGraph, ...]
    grid: Optional[GridModel] = None
    lodf_overrides: Optional[dict[str, float]] = None

    def utility(self, utility_id: str) -> UtilityGraph:
        for u in self.utilities:
            if u.id == utility_id:
                return u
        raise TopologyError(f"unknown utility {utility_id!r}", entity=utility_id)

    def utility_index(self, utility_id: str) -> int:
        for i, u in enumerate(self.utilities):
            if u.id == utility_id:
                return i
        raise TopologyError(f"unknown utility {utility_id!r}", entity=utility_id)


def _parse_utility(doc: Mapping) -> UtilityGraph:
    try:
        uid = str(doc["id"])
        ucc_id = str(doc["ucc_id"])
        node_docs = list(doc["nodes"])
        edge_docs = list(doc["edges"])
    except KeyError as exc:
        raise TopologyError(f"utility document missing required key {exc}") from exc

    nodes = []
    for nd in node_docs:
        nid = str(nd["id"])
        try:
            kind = NodeKind(nd["kind"])
        except ValueError:
            raise TopologyError(f"node {nid!r} has unknown kind {nd['kind']!r}", entity=nid)
        profile = None
        if "profile" in nd and nd["profile"] is not None:
            p = nd["profile"]
            try:
                profile = SubstationProfile(
                    n_iso=int(p["iso"]), n_cb=int(p["cb"]),
                    n_xline=int(p["xline"]), n_xfmr=int(p["xfmr"]),
                )
            except KeyError as exc:
                raise TopologyError(f"profile of {nid!r} missing key {exc}", entity=nid)
        nodes.append(Node(id=nid, kind=kind, profile=profile))

    edges = []
    for ed in edge_docs:
        if len(ed) != 2:
            raise TopologyError(f"edge {ed!r} must be a pair", entity=uid)
        edges.append((str(ed[0]), str(ed[1])))
    return UtilityGraph(id=uid, ucc_id=ucc_id, nodes=tuple(nodes), edges=tuple(edges))


def load_topology(source: Union[str, Path, Mapping]) -> SystemModel:
    """Load and validate a topology document (path or parsed mapping)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, Mapping):
        raise TopologyError("topology document must be a JSON object")
    if "utilities" not in doc:
        raise TopologyError("topology document missing 'utilities'")

    utilities = tuple(_parse_utility(ud) for ud in doc["utilities"])
    if not utilities:
        raise TopologyError("topology document has no utilities")
    seen: dict[str, str] = {}
    for u in utilities:
        if u.id in {x.id for x in utilities if x is not u}:
            raise TopologyError(f"duplicate utility id {u.id!r}", entity=u.id)
        for n in u.nodes:
            if n.id in seen:
                raise TopologyError(
                    f"node id {n.id!r} appears in both {seen[n.id]!r} and {u.id!r}", entity=n.id
                )
            seen[n.id] = u.id

    grid = None
    overrides = None
    if doc.get("grid") is not None:
        grid, overrides = parse_grid(doc["grid"])
        all_subs = {n.id for u in utilities for n in u.nodes if n.kind is NodeKind.SUBSTATION}
        for ln in grid.lines:
            for sub in (ln.from_sub, ln.to_sub):
                if sub not in all_subs:
                    raise TopologyError(
                        f"grid line {ln.id!r} references unknown substation {sub!r}", entity=ln.id
                    )
    return SystemModel(utilities=utilities, grid=grid, lodf_overrides=overrides)


def utility_to_document(graph: UtilityGraph) -> dict:
    return {
        "id": graph.id,
        "ucc_id": graph.ucc_id,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                **(
                    {
                        "profile": {
                            "iso": n.profile.n_iso,
                            "cb": n.profile.n_cb,
                            "xline": n.profile.n_xline,
                            "xfmr": n.profile.n_xfmr,
                        }
                    }
                    if n.profile is not None
                    else {}
                ),
            }
            for n in sorted(graph.nodes, key=lambda n: n.id)
        ],
        "edges": [list(e) for e in graph.edges],
    }


def system_to_document(system: SystemModel) -> dict:
    doc: dict = {"utilities": [utility_to_document(u) for u in system.utilities]}
    if system.grid is not None:
        doc["grid"] = grid_to_document(system.grid, system.lodf_overrides)
    return doc
