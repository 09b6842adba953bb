"""Physical-grid resilience inputs: DC line outage distribution factors
and the protection-device security metric.

The grid is a DC model: buses, lines with per-unit reactance, one slack
bus. LODF[l, k] is the fraction of line k's pre-outage flow that appears
on line l after k is removed. Each line also records which substation its
two ends live in, which is how factors are later attributed to security
zones.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

#: Outages with |1 - PTDF_kk| below this are treated as islanding (bridge lines).
ISLANDING_TOL = 1e-9

#: Returned by nlodf() when the factor magnitudes have (near-)zero spread.
ZERO_STD_SENTINEL = 1e6


class GridError(ValueError):
    """Raised for grid documents or grids that violate the DC model rules."""

    def __init__(self, message: str, entity: Optional[str] = None):
        super().__init__(message)
        self.entity = entity


class IslandingError(GridError):
    """Raised when an outage factor is requested for a line whose loss islands the grid."""


@dataclass(frozen=True)
class GridLine:
    id: str
    from_bus: str
    to_bus: str
    x: float
    from_sub: str
    to_sub: str


@dataclass(frozen=True)
class GridModel:
    buses: tuple[str, ...]
    slack: str
    lines: tuple[GridLine, ...]

    def __post_init__(self):
        seen = set()
        for b in self.buses:
            if b in seen:
                raise GridError(f"duplicate bus id {b!r}", entity=b)
            seen.add(b)
        if self.slack not in seen:
            raise GridError(f"slack bus {self.slack!r} is not a declared bus", entity=self.slack)
        line_ids = set()
        for ln in self.lines:
            if ln.id in line_ids:
                raise GridError(f"duplicate line id {ln.id!r}", entity=ln.id)
            line_ids.add(ln.id)
            if ln.x <= 0:
                raise GridError(f"line {ln.id!r} has non-positive reactance {ln.x}", entity=ln.id)
            for bus in (ln.from_bus, ln.to_bus):
                if bus not in seen:
                    raise GridError(f"line {ln.id!r} references unknown bus {bus!r}", entity=ln.id)
            if ln.from_bus == ln.to_bus:
                raise GridError(f"line {ln.id!r} is a self-loop", entity=ln.id)
        if not _connected(self.buses, self.lines):
            raise GridError("grid graph is not connected")


def _connected(buses: Sequence[str], lines: Sequence[GridLine]) -> bool:
    if not buses:
        return False
    adj: dict[str, list[str]] = {b: [] for b in buses}
    for ln in lines:
        adj[ln.from_bus].append(ln.to_bus)
        adj[ln.to_bus].append(ln.from_bus)
    seen = {buses[0]}
    stack = [buses[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(buses)


@dataclass(frozen=True)
class LodfTable:
    """Dense |lines| x |lines| factor table.

    ``matrix[l, k]`` is LODF of monitored line l for outage of line k.
    Diagonal entries and columns for islanding outages are NaN; islanding
    outages are listed in ``islanding``.
    """

    line_ids: tuple[str, ...]
    matrix: np.ndarray
    endpoints: tuple[tuple[str, str], ...]  # (from_sub, to_sub) per line
    islanding: frozenset[str] = frozenset()
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index.update({lid: i for i, lid in enumerate(self.line_ids)})
        self.matrix.setflags(write=False)

    def factor(self, monitored: str, outaged: str) -> float:
        if monitored == outaged:
            raise ValueError(f"LODF[{monitored!r}, {outaged!r}] is undefined for l == k")
        if outaged in self.islanding:
            raise IslandingError(
                f"outage of line {outaged!r} islands the grid; factor unavailable",
                entity=outaged,
            )
        return float(self.matrix[self._index[monitored], self._index[outaged]])

    def outage_factors(self, outaged: str) -> dict[str, float]:
        """All monitored-line factors for one outage; raises IslandingError for bridges."""
        if outaged in self.islanding:
            raise IslandingError(
                f"outage of line {outaged!r} islands the grid; factor unavailable",
                entity=outaged,
            )
        k = self._index[outaged]
        return {
            lid: float(self.matrix[i, k])
            for i, lid in enumerate(self.line_ids)
            if lid != outaged
        }

    def available_pairs(self) -> Iterable[tuple[str, str, float]]:
        """Yield (monitored, outaged, factor) for every defined ordered pair."""
        n = len(self.line_ids)
        for k in range(n):
            if self.line_ids[k] in self.islanding:
                continue
            for l in range(n):
                if l != k:
                    yield self.line_ids[l], self.line_ids[k], float(self.matrix[l, k])

    def line_subs(self, line_id: str) -> tuple[str, str]:
        return self.endpoints[self._index[line_id]]


def compute_lodf(grid: GridModel, tol: float = ISLANDING_TOL) -> LodfTable:
    """Single-outage LODF table from the DC susceptance model.

    LODF[l, k] = PTDF[l, k-pair] / (1 - PTDF[k, k-pair]) where PTDF is built
    from injection shift factors of the slack-reduced susceptance matrix.
    Islanding lines (1 - PTDF_kk ~ 0) get NaN columns and are reported in
    ``islanding`` rather than raising.
    """
    nb = len(grid.buses)
    nl = len(grid.lines)
    bus_idx = {b: i for i, b in enumerate(grid.buses)}
    slack = bus_idx[grid.slack]

    if nl == 0:
        return LodfTable(line_ids=(), matrix=np.zeros((0, 0)), endpoints=())

    # Incidence (lines x buses) and susceptances.
    A = np.zeros((nl, nb))
    b = np.empty(nl)
    for i, ln in enumerate(grid.lines):
        A[i, bus_idx[ln.from_bus]] = 1.0
        A[i, bus_idx[ln.to_bus]] = -1.0
        b[i] = 1.0 / ln.x

    B = A.T @ (b[:, None] * A)
    keep = [i for i in range(nb) if i != slack]
    B_r = B[np.ix_(keep, keep)]
    A_r = A[:, keep]
    try:
        # H = diag(b) @ A_r @ inv(B_r), via one solve against the symmetric B_r.
        H_r = np.linalg.solve(B_r, (b[:, None] * A_r).T).T
    except np.linalg.LinAlgError as exc:
        raise GridError("singular susceptance matrix (is the grid connected?)") from exc

    H = np.zeros((nl, nb))
    H[:, keep] = H_r
    ptdf = H @ A.T  # ptdf[l, k] = flow on l per unit transfer across k's endpoints

    denom = 1.0 - np.diag(ptdf)
    islanding = frozenset(
        grid.lines[k].id for k in range(nl) if abs(denom[k]) <= tol
    )
    safe = np.where(np.abs(denom) <= tol, 1.0, denom)
    lodf = ptdf / safe[None, :]
    for k in range(nl):
        if grid.lines[k].id in islanding:
            lodf[:, k] = np.nan
    np.fill_diagonal(lodf, np.nan)

    return LodfTable(
        line_ids=tuple(ln.id for ln in grid.lines),
        matrix=lodf,
        endpoints=tuple((ln.from_sub, ln.to_sub) for ln in grid.lines),
        islanding=islanding,
    )


def lodf_from_overrides(
    lines: Sequence[GridLine], overrides: Mapping[str, float]
) -> LodfTable:
    """Build a factor table from user-supplied per-line values.

    For users without impedance data: ``overrides[l]`` is taken as LODF[l, k]
    for every outage k != l. Lines without an override contribute 0.
    """
    nl = len(lines)
    matrix = np.zeros((nl, nl))
    for i, ln in enumerate(lines):
        matrix[i, :] = float(overrides.get(ln.id, 0.0))
    np.fill_diagonal(matrix, np.nan)
    return LodfTable(
        line_ids=tuple(ln.id for ln in lines),
        matrix=matrix,
        endpoints=tuple((ln.from_sub, ln.to_sub) for ln in lines),
    )


def nlodf(factors: Sequence[float], zero_std_sentinel: float = ZERO_STD_SENTINEL) -> float:
    """mean(|x|) / std(|x|) with population standard deviation.

    Near-zero spread returns the sentinel instead of dividing by ~0, so the
    value stays orderable inside Pareto sorting.
    """
    if len(factors) == 0:
        raise ValueError("nlodf requires at least one factor")
    mags = [abs(float(v)) for v in factors]
    mean = sum(mags) / len(mags)
    var = sum((m - mean) ** 2 for m in mags) / len(mags)
    std = math.sqrt(var)
    if std < 1e-12:
        return zero_std_sentinel
    return mean / std


#: Order of the four protection-device types everywhere counts are passed around.
DEVICE_TYPES = ("iso", "cb", "xline", "xfmr")


@dataclass(frozen=True)
class Weights:
    """Per-device-type weights of the physical-security metric (all > 0)."""

    iso: float = 1.0
    cb: float = 1.0
    xline: float = 1.0
    xfmr: float = 1.0

    def __post_init__(self):
        for name in DEVICE_TYPES:
            if getattr(self, name) <= 0:
                raise ValueError(f"weight {name} must be strictly positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.iso, self.cb, self.xline, self.xfmr)


def ps_metric(counts: Sequence[int], weights: Weights) -> float:
    """Sum of 1/(w_t * n_t) over the four device types; n_t = 0 terms are skipped.

    A zone with none of some device type poses no risk of that type, so
    zero counts contribute 0 rather than blowing up.
    """
    cs = tuple(counts)
    if len(cs) != 4:
        raise ValueError("counts must have exactly four entries (iso, cb, xline, xfmr)")
    total = 0.0
    for n, w in zip(cs, weights.as_tuple()):
        if n < 0:
            raise ValueError("device counts must be non-negative")
        if n > 0:
            total += 1.0 / (w * n)
    return total


def synth_grid(
    substation_ids: Sequence[str],
    seed: int,
    extra_line_prob: float = 0.15,
    bus_prefix: str = "B",
    line_prefix: str = "L",
) -> GridModel:
    """Random connected DC grid with one bus per substation.

    A seeded random spanning tree guarantees connectivity; extra lines are
    added per substation pair with the given probability. Deterministic for
    a fixed seed and substation order.
    """
    subs = list(substation_ids)
    if not subs:
        raise GridError("at least one substation is required")
    rng = random.Random(seed)
    buses = tuple(f"{bus_prefix}_{s}" for s in subs)
    lines: list[GridLine] = []
    counter = 1

    def add_line(i: int, j: int):
        nonlocal counter
        x = round(rng.uniform(0.05, 0.5), 4)
        lines.append(
            GridLine(
                id=f"{line_prefix}{counter:03d}",
                from_bus=buses[i],
                to_bus=buses[j],
                x=x,
                from_sub=subs[i],
                to_sub=subs[j],
            )
        )
        counter += 1

    # Random spanning tree: attach each bus to a random earlier one.
    for j in range(1, len(subs)):
        add_line(rng.randrange(j), j)
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            if rng.random() < extra_line_prob:
                add_line(i, j)

    return GridModel(buses=buses, slack=buses[0], lines=tuple(lines))


def parse_grid(doc: Mapping) -> tuple[GridModel, Optional[dict[str, float]]]:
    """Parse the grid sub-document; returns (model, lodf_overrides or None)."""
    try:
        bus_docs = list(doc["buses"])
        line_docs = list(doc["lines"])
    except KeyError as exc:
        raise GridError(f"grid document missing required key {exc}") from exc

    buses = []
    slack = None
    for bd in bus_docs:
        bid = str(bd["id"])
        buses.append(bid)
        if bd.get("slack"):
            if slack is not None:
                raise GridError("grid declares more than one slack bus", entity=bid)
            slack = bid
    if slack is None:
        raise GridError("grid declares no slack bus")

    lines = tuple(
        GridLine(
            id=str(ld["id"]),
            from_bus=str(ld["from"]),
            to_bus=str(ld["to"]),
            x=float(ld["x"]),
            from_sub=str(ld["from_sub"]),
            to_sub=str(ld["to_sub"]),
        )
        for ld in line_docs
    )
    overrides = doc.get("lodf_overrides")
    if overrides is not None:
        overrides = {str(k): float(v) for k, v in overrides.items()}
        for lid in overrides:
            if lid not in {ln.id for ln in lines}:
                raise GridError(f"lodf_overrides references unknown line {lid!r}", entity=lid)
    return GridModel(buses=tuple(buses), slack=slack, lines=lines), overrides


def grid_to_document(grid: GridModel, overrides: Optional[Mapping[str, float]] = None) -> dict:
    doc: dict = {
        "buses": [{"id": b, "slack": b == grid.slack} for b in grid.buses],
        "lines": [
            {
                "id": ln.id,
                "from": ln.from_bus,
                "to": ln.to_bus,
                "x": ln.x,
                "from_sub": ln.from_sub,
                "to_sub": ln.to_sub,
            }
            for ln in grid.lines
        ],
    }
    if overrides:
        doc["lodf_overrides"] = dict(overrides)
    return doc
