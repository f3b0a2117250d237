"""Breach paths along watershed contours.

Contour pixels form a node-weighted graph (weight = fused detection
probability, 8-adjacency). For a pair of opposite grid edges, every contour
node on the start edge runs a node-weighted Dijkstra; the cheapest path to
any contour node on the end edge is the breach path, and its worst (highest)
detection probability is the direction's ``p_opt``. When no such path
exists the value falls back to contour-segment weights around junctions,
then to the global maximum over contour nodes. The overall answer is the
smaller of the longitudinal (first row to last row) and cross (first column
to last column) results.

Coordinates are 0-based ``(row, col)`` pairs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EmptyContour, InvalidRange
from .watershed import CONTOUR, WatershedResult, neighbor_table

# Distance written for unreachable nodes in serialised output.
SENTINEL = 65535


class Branch(str, Enum):
    PATH = "PATH"
    CONTOUR_WEIGHT = "CONTOUR_WEIGHT"
    GLOBAL_MAX = "GLOBAL_MAX"


class Direction(str, Enum):
    LONGITUDINAL = "longitudinal"
    CROSS = "cross"
    COMBINED = "combined"


# edge id -> (axis, which end); edges 1/2 are first/last row, 3/4 first/last column
EDGES = {1: (0, "first"), 2: (0, "last"), 3: (1, "first"), 4: (1, "last")}


@dataclass(frozen=True)
class ContourGraph:
    coords: tuple[tuple[int, int], ...]
    weights: np.ndarray = field(repr=False)
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    shape: tuple[int, int] = (0, 0)

    def __len__(self) -> int:
        return len(self.coords)

    def on_edge(self, edge: int) -> list[int]:
        axis, end = EDGES[edge]
        target = 0 if end == "first" else self.shape[axis] - 1
        return [v for v, c in enumerate(self.coords) if c[axis] == target]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


@dataclass(frozen=True)
class PathRecord:
    start: tuple[int, int]
    end: tuple[int, int]
    sum_weight: float
    chain: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BreachResult:
    p_opt: float
    branch: Branch
    direction: Direction
    path: PathRecord | None = None

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "branch": self.branch.value,
            "p_opt": self.p_opt,
            "path": [list(c) for c in self.path.chain] if self.path else [],
            "sum_weight": self.path.sum_weight if self.path else SENTINEL,
        }


def graph_from_pixels(pixels, weights, shape, connectivity: int = 8) -> ContourGraph:
    """Contour graph over an explicit pixel set (row-major node order)."""
    pixels = sorted((int(r), int(c)) for r, c in pixels)
    if not pixels:
        raise EmptyContour("no contour pixels")
    rows, cols = shape
    index = {p: v for v, p in enumerate(pixels)}
    table = neighbor_table((rows, cols), connectivity)
    adjacency = []
    for r, c in pixels:
        adj = []
        for q in table[r * cols + c]:
            v = index.get(divmod(q, cols))
            if v is not None:
                adj.append(v)
        adjacency.append(tuple(adj))
    w = np.asarray(weights, dtype=float)
    node_w = np.array([w[r, c] for r, c in pixels]) if w.ndim == 2 else w
    if node_w.size and (node_w.min() < 0 or node_w.max() > 1):
        raise InvalidRange("node weights must lie in [0, 1]")
    return ContourGraph(tuple(pixels), node_w, tuple(adjacency), (rows, cols))


def build_contour_graph(ws: WatershedResult, smap) -> ContourGraph:
    probs = smap.grid() if hasattr(smap, "grid") else np.asarray(smap, dtype=float)
    if probs.shape != ws.labels.shape:
        raise InvalidRange(f"map shape {probs.shape} does not match labels {ws.labels.shape}")
    rows, cols = np.nonzero(ws.labels == CONTOUR)
    return graph_from_pixels(zip(rows, cols), probs, ws.labels.shape, ws.connectivity)


def dijkstra_min_sum(g: ContourGraph, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Minimal node-weight sums from ``source``; both end nodes count.

    Unreachable nodes get ``inf`` distance and parent ``-1``.
    """
    n = len(g)
    dist = np.full(n, math.inf)
    parent = np.full(n, -1, dtype=np.int64)
    w = g.weights
    dist[source] = w[source]
    heap = [(w[source], source)]
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in g.adjacency[u]:
            nd = d + w[v]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def serialize_distances(dist: np.ndarray) -> list[float]:
    return [SENTINEL if not math.isfinite(d) else float(d) for d in dist]


def _chain(parent: np.ndarray, end: int) -> list[int]:
    out = [end]
    while parent[out[-1]] >= 0:
        out.append(int(parent[out[-1]]))
    return out[::-1]


def _direction(start_edge: int, end_edge: int) -> Direction:
    return Direction.LONGITUDINAL if {start_edge, end_edge} <= {1, 2} else Direction.CROSS


def junction_segments(g: ContourGraph) -> list[list[int]]:
    """Contour pieces hanging off junction nodes (degree >= 3).

    Junctions are cut out of the graph; each remaining connected piece that
    touches a junction is one segment, returned together with the junctions
    it touches.
    """
    junction = [g.degree(v) >= 3 for v in range(len(g))]
    seen = [False] * len(g)
    segments = []
    for v in range(len(g)):
        if junction[v] or seen[v]:
            continue
        members, ends, stack = [], set(), [v]
        seen[v] = True
        while stack:
            u = stack.pop()
            members.append(u)
            for x in g.adjacency[u]:
                if junction[x]:
                    ends.add(x)
                elif not seen[x]:
                    seen[x] = True
                    stack.append(x)
        if ends:
            segments.append(sorted(members) + sorted(ends))
    return segments


def fallback(g: ContourGraph, direction: Direction) -> BreachResult:
    """No edge-to-edge path: weakest junction segment, else the global max."""
    segments = junction_segments(g)
    if segments:
        p = min(float(g.weights[s].max()) for s in segments)
        return BreachResult(p, Branch.CONTOUR_WEIGHT, direction)
    return BreachResult(float(g.weights.max()), Branch.GLOBAL_MAX, direction)


def penetrate(g: ContourGraph, start_edge: int, end_edge: int) -> BreachResult:
    if start_edge == end_edge:
        raise InvalidRange("start and end edges must differ")
    if len(g) == 0:
        raise EmptyContour("no contour pixels")
    direction = _direction(start_edge, end_edge)
    ends = g.on_edge(end_edge)
    best = None
    for s in g.on_edge(start_edge):
        dist, parent = dijkstra_min_sum(g, s)
        for t in ends:
            if not math.isfinite(dist[t]):
                continue
            nodes = _chain(parent, t)
            p_opt = float(g.weights[nodes].max())
            key = (float(dist[t]), p_opt, g.coords[s], g.coords[t])
            if best is None or key < best[0]:
                best = (key, nodes)
    if best is None:
        return fallback(g, direction)
    (total, p_opt, start, end), nodes = best
    record = PathRecord(start, end, total, tuple(g.coords[v] for v in nodes))
    return BreachResult(p_opt, Branch.PATH, direction, record)


def optimal_breach(g: ContourGraph) -> BreachResult:
    """Smaller of the longitudinal and cross results (ties keep longitudinal)."""
    lon = penetrate(g, 1, 2)
    cross = penetrate(g, 3, 4)
    if lon.branch is not Branch.PATH and cross.branch is not Branch.PATH:
        # the fallbacks ignore direction, so both sides agree
        return BreachResult(lon.p_opt, lon.branch, Direction.COMBINED)
    return cross if cross.p_opt < lon.p_opt else lon
