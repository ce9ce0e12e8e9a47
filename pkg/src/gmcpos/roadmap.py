"""Weighted roadmap graph, shortest paths and the generalized graph distance.

The generalized distance between two arbitrary points hops from each point to
its nearest graph node in a straight line and follows the shortest graph path
in between::

    d_G(a, b) = |a - v_a| + delta(v_a, v_b) + |v_b - b|
"""

from __future__ import annotations

import heapq
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gmcpos.distill import RawGraph
from gmcpos.errors import GraphError
from gmcpos.mapio import WorldPoint

GRID_INDEX_THRESHOLD = 4096


@dataclass(eq=False)
class RoadmapGraph:
    """Connected undirected graph with Euclidean edge weights.

    Treat instances as immutable; shortest-path results are memoized per
    source node.
    """

    nodes: list[WorldPoint]
    adjacency: list[list[tuple[int, float]]]
    _xy: np.ndarray = field(init=False, repr=False)
    _sssp: dict = field(init=False, repr=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)
    _index: "_GridIndex | None" = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if not self.nodes:
            raise GraphError("graph has no nodes")
        self._xy = np.array([[p[0], p[1]] for p in self.nodes], dtype=np.float64)
        self._xy.flags.writeable = False
        if len(self.nodes) > GRID_INDEX_THRESHOLD:
            self._index = _GridIndex(self._xy)

    @property
    def node_degree(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(u, v, w) for u, nbrs in enumerate(self.adjacency) for v, w in nbrs if u < v]

    def distances_from(self, source: int) -> np.ndarray:
        """Shortest-path lengths from ``source`` to every node (memoized)."""
        cached = self._sssp.get(source)
        if cached is not None:
            return cached
        dist = _dijkstra(self.adjacency, source)
        dist.flags.writeable = False
        with self._lock:
            return self._sssp.setdefault(source, dist)

    def to_dict(self) -> dict:
        return {
            "nodes": [[p.x, p.y] for p in self.nodes],
            "edges": [[u, v, w] for u, v, w in self.edges()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RoadmapGraph":
        nodes = [WorldPoint(float(x), float(y)) for x, y in data["nodes"]]
        adjacency: list[list[tuple[int, float]]] = [[] for _ in nodes]
        for edge in data["edges"]:
            u, v = int(edge[0]), int(edge[1])
            w = _edge_weight(nodes, u, v)
            if len(edge) > 2 and abs(float(edge[2]) - w) > 1e-6:
                raise GraphError(f"edge ({u}, {v}) weight {edge[2]} does not match its length {w}")
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        graph = cls(nodes, adjacency)
        _check_connected(graph)
        return graph


def _edge_weight(nodes, u, v) -> float:
    if not (0 <= u < len(nodes) and 0 <= v < len(nodes)):
        raise GraphError(f"edge ({u}, {v}) references a missing node")
    if u == v:
        raise GraphError(f"self-loop at node {u}")
    w = math.hypot(nodes[u].x - nodes[v].x, nodes[u].y - nodes[v].y)
    if w <= 0:
        raise GraphError(f"edge ({u}, {v}) joins coincident nodes")
    return w


def _check_connected(graph: RoadmapGraph):
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v, _ in graph.adjacency[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) != len(graph.nodes):
        raise GraphError(f"graph is disconnected: {len(graph.nodes) - len(seen)} node(s) unreachable from node 0")


def _dijkstra(adjacency, source: int) -> np.ndarray:
    dist = np.full(len(adjacency), np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = bytearray(len(adjacency))
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = 1
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def finalize_graph(raw: RawGraph, origin=(0.0, 0.0)) -> RoadmapGraph:
    """Shift raw node coordinates by the map origin and weight edges by length."""
    ox, oy = origin
    nodes = [WorldPoint(x + ox, y + oy) for x, y in raw.nodes]
    adjacency: list[list[tuple[int, float]]] = [[] for _ in nodes]
    seen = set()
    for u, v in raw.edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        w = _edge_weight(nodes, u, v)
        adjacency[u].append((v, w))
        adjacency[v].append((u, w))
    graph = RoadmapGraph(nodes, adjacency)
    _check_connected(graph)
    return graph


def shortest_path_length(g: RoadmapGraph, u: int, v: int) -> float:
    if u == v:
        return 0.0
    # always search from the lower index so the result is bit-symmetric
    lo, hi = min(u, v), max(u, v)
    return float(g.distances_from(lo)[hi])


def nearest_node(g: RoadmapGraph, p) -> int:
    """Index of the node closest to ``p``; ties go to the lowest index."""
    if g._index is not None:
        return g._index.nearest(p)
    d = np.hypot(g.xy[:, 0] - p[0], g.xy[:, 1] - p[1])
    return int(np.argmin(d))


def generalized_distance(g: RoadmapGraph, a, b) -> float:
    va = nearest_node(g, a)
    vb = nearest_node(g, b)
    na, nb = g.nodes[va], g.nodes[vb]
    ends = sorted([(va, math.hypot(a[0] - na.x, a[1] - na.y)), (vb, math.hypot(b[0] - nb.x, b[1] - nb.y))])
    # fixed summation order keeps d_G(a, b) == d_G(b, a) exactly
    return ends[0][1] + shortest_path_length(g, va, vb) + ends[1][1]


def distances_to_point(g: RoadmapGraph, p) -> np.ndarray:
    """d_G from every node to ``p`` at once."""
    vp = nearest_node(g, p)
    node = g.nodes[vp]
    return g.distances_from(vp) + math.hypot(node.x - p[0], node.y - p[1])


class _GridIndex:
    """Uniform bucket grid for nearest-node queries on large graphs."""

    def __init__(self, xy: np.ndarray):
        self.xy = xy
        lo = xy.min(axis=0)
        hi = xy.max(axis=0)
        span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
        self.cell = span / max(1.0, math.sqrt(len(xy)))
        self.lo = lo
        self.buckets: dict[tuple[int, int], list[int]] = {}
        keys = np.floor((xy - lo) / self.cell).astype(np.int64)
        for i, (kx, ky) in enumerate(keys.tolist()):
            self.buckets.setdefault((kx, ky), []).append(i)
        self.kmax = keys.max(axis=0)

    def nearest(self, p) -> int:
        kx = int(math.floor((p[0] - self.lo[0]) / self.cell))
        ky = int(math.floor((p[1] - self.lo[1]) / self.cell))
        best_d, best_i = math.inf, -1
        ring = 0
        limit = int(max(self.kmax[0], self.kmax[1])) + abs(kx) + abs(ky) + 2
        while ring <= limit:
            for bx in range(kx - ring, kx + ring + 1):
                for by in range(ky - ring, ky + ring + 1):
                    if max(abs(bx - kx), abs(by - ky)) != ring:
                        continue
                    for i in self.buckets.get((bx, by), ()):
                        d = math.hypot(self.xy[i, 0] - p[0], self.xy[i, 1] - p[1])
                        if d < best_d or (d == best_d and i < best_i):
                            best_d, best_i = d, i
            # anything outside this ring is at least ring * cell away
            if best_i >= 0 and best_d < ring * self.cell:
                break
            ring += 1
        return best_i


def load_graph(path) -> RoadmapGraph:
    return RoadmapGraph.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_graph(g: RoadmapGraph, path) -> Path:
    path = Path(path)
    path.write_text(g.to_json() + "\n", encoding="utf-8")
    return path
