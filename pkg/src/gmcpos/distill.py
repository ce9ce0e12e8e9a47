"""Voronoi-style distillation of an occupancy grid into a sparse roadmap.

Pipeline: exact Euclidean clearance field -> distance-ordered homotopic
thinning of the safe free space -> pixel skeleton -> traced junction/endpoint
graph -> spur pruning, crossing merge, subdivision -> :class:`RawGraph`.

Coordinates in a :class:`RawGraph` are meters relative to the bottom-left
corner of the map; :func:`gmcpos.roadmap.finalize_graph` adds the origin.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from gmcpos.errors import NoSkeletonError
from gmcpos.mapio import OccupancyGrid

log = logging.getLogger(__name__)

# clockwise from north-west; bit i of a neighborhood code is _OFFSETS[i]
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


@dataclass(frozen=True)
class SkeletonParams:
    segment_length: float = 1.0
    crossing_merge_radius: float = 0.4
    end_segment_min_length: float = 1.0
    min_clearance: float = 0.25

    def __post_init__(self):
        for name in ("segment_length", "crossing_merge_radius", "end_segment_min_length", "min_clearance"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if self.segment_length <= 0:
            raise ValueError(f"segment_length must be > 0, got {self.segment_length}")


@dataclass(frozen=True)
class ClearanceField:
    """Meters from each cell center to the nearest non-free cell center."""

    values: np.ndarray
    grid: OccupancyGrid


@dataclass(frozen=True)
class Skeleton:
    mask: np.ndarray
    clearance: ClearanceField

    @property
    def grid(self) -> OccupancyGrid:
        return self.clearance.grid

    def cells(self) -> list[tuple[int, int]]:
        return [(int(r), int(c)) for r, c in zip(*np.nonzero(self.mask))]


@dataclass
class RawGraph:
    nodes: list[tuple[float, float]]
    edges: list[tuple[int, int]]
    node_cells: list[tuple[int, int]] = field(default_factory=list)
    dropped_components: int = 0

    def to_dict(self) -> dict:
        return {"nodes": [list(p) for p in self.nodes], "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RawGraph":
        nodes = [(float(x), float(y)) for x, y in data["nodes"]]
        edges = [(int(e[0]), int(e[1])) for e in data["edges"]]
        return cls(nodes, edges)


# --------------------------------------------------------------------------
# clearance


def distance_transform(grid: OccupancyGrid) -> ClearanceField:
    """Exact Euclidean clearance; the map border counts as an obstacle ring."""
    padded = np.pad(grid.free_mask, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1] * grid.resolution
    dist[~grid.free_mask] = 0.0
    dist.flags.writeable = False
    return ClearanceField(dist, grid)


# --------------------------------------------------------------------------
# thinning


def _components_in_ring(members, adjacent) -> list[set]:
    comps, seen = [], set()
    for start in members:
        if start in seen:
            continue
        comp, stack = {start}, [start]
        while stack:
            a = stack.pop()
            for b in members:
                if b not in comp and adjacent(a, b):
                    comp.add(b)
                    stack.append(b)
        seen |= comp
        comps.append(comp)
    return comps


def _adjacent8(a, b) -> bool:
    (ra, ca), (rb, cb) = _OFFSETS[a], _OFFSETS[b]
    return max(abs(ra - rb), abs(ca - cb)) == 1


def _adjacent4(a, b) -> bool:
    (ra, ca), (rb, cb) = _OFFSETS[a], _OFFSETS[b]
    return abs(ra - rb) + abs(ca - cb) == 1


def _neighborhood_tables() -> tuple[np.ndarray, np.ndarray]:
    """Simple-point flag and foreground count for each 8-neighborhood code."""
    simple = np.zeros(256, dtype=bool)
    count = np.zeros(256, dtype=np.int8)
    four = {1, 3, 5, 7}  # N, E, S, W
    for code in range(256):
        fg = [i for i in range(8) if code >> i & 1]
        bg = [i for i in range(8) if not code >> i & 1]
        count[code] = len(fg)
        t8 = len(_components_in_ring(fg, _adjacent8))
        t4 = sum(1 for comp in _components_in_ring(bg, _adjacent4) if comp & four)
        simple[code] = t8 == 1 and t4 == 1
    return simple, count


_SIMPLE, _COUNT = _neighborhood_tables()


def _codes(mask: np.ndarray) -> np.ndarray:
    padded = np.pad(mask, 1, constant_values=False)
    h, w = mask.shape
    code = np.zeros(mask.shape, dtype=np.int32)
    for bit, (dr, dc) in enumerate(_OFFSETS):
        code |= padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w].astype(np.int32) << bit
    return code


def thin(mask: np.ndarray, priority: np.ndarray) -> np.ndarray:
    """Topology-preserving thinning, deleting low-priority cells first.

    A cell is deleted when it is a simple point (8-connected foreground,
    4-connected background) that is not an end point.  Cells are visited in
    ascending ``priority``; ties go to cells with more foreground neighbors,
    then ascending ``(row, col)``.  Sweeps repeat until nothing changes.
    """
    out = np.pad(mask.astype(bool), 1, constant_values=False)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return mask.astype(bool).copy()
    crowd = _COUNT[_codes(mask)[rows, cols]]
    order = np.lexsort((cols, rows, -crowd, priority[rows, cols]))
    rows = (rows[order] + 1).tolist()
    cols = (cols[order] + 1).tolist()
    simple = _SIMPLE.tolist()
    count = _COUNT.tolist()
    offsets = _OFFSETS
    changed = True
    while changed:
        changed = False
        for r, c in zip(rows, cols):
            if not out[r, c]:
                continue
            code = 0
            for bit, (dr, dc) in enumerate(offsets):
                if out[r + dr, c + dc]:
                    code |= 1 << bit
            if count[code] > 1 and simple[code]:
                out[r, c] = False
                changed = True
    return out[1:-1, 1:-1]


def extract_skeleton(clearance: ClearanceField, params: SkeletonParams = SkeletonParams()) -> Skeleton:
    """Thin, ridge-following skeleton of the free cells with enough clearance.

    Thinning removes cells in order of increasing clearance, so what survives
    is the ridge of the clearance field (the discrete generalized Voronoi
    diagram), one cell wide except at junctions.
    """
    values = clearance.values
    free = values > 0
    if not free.any():
        raise NoSkeletonError("no skeleton: the map has no free cells")
    safe = free & (values >= params.min_clearance)
    if not safe.any():
        raise NoSkeletonError(
            f"no skeleton: no free cell has clearance >= min_clearance={params.min_clearance} "
            f"(largest clearance is {values.max():.3f} m)",
            parameter="min_clearance",
        )
    mask = thin(safe, values)
    mask.flags.writeable = False
    return Skeleton(mask, clearance)


# --------------------------------------------------------------------------
# graph tracing


@dataclass
class _TopoEdge:
    u: int
    v: int
    path: list  # cells, path[0] is u's cell and path[-1] is v's cell


class _Topology:
    """Junction/endpoint graph whose edges carry their skeleton cell paths."""

    def __init__(self, skeleton: Skeleton):
        self.skeleton = skeleton
        self.res = skeleton.grid.resolution
        self.node_cell: dict[int, tuple[int, int]] = {}
        self.node_members: dict[int, list] = {}
        self.junction: dict[int, bool] = {}
        self.edges: dict[int, _TopoEdge] = {}
        self._next_edge = 0
        self._trace()

    # -- construction --------------------------------------------------

    def _trace(self):
        cells = self.skeleton.cells()
        cellset = set(cells)

        def nbrs(p):
            r, c = p
            return [(r + dr, c + dc) for dr, dc in _OFFSETS if (r + dr, c + dc) in cellset]

        degree = {p: len(nbrs(p)) for p in cells}
        node_px = {p for p in cells if degree[p] != 2}
        cluster_of: dict = {}
        nid = 0
        for p in cells:
            if p not in node_px or p in cluster_of:
                continue
            members = [p]
            cluster_of[p] = nid
            if degree[p] >= 3:
                queue = deque([p])
                while queue:
                    a = queue.popleft()
                    for b in nbrs(a):
                        if b in node_px and degree[b] >= 3 and b not in cluster_of:
                            cluster_of[b] = nid
                            members.append(b)
                            queue.append(b)
            members.sort()
            self.node_members[nid] = members
            self.node_cell[nid] = _snap(_centroid(members), members)
            self.junction[nid] = degree[p] >= 3
            nid += 1

        visited = set()
        direct = set()
        for s in sorted(node_px):
            for p in nbrs(s):
                if p in node_px:
                    a, b = cluster_of[s], cluster_of[p]
                    if a != b and (min(a, b), max(a, b)) not in direct:
                        direct.add((min(a, b), max(a, b)))
                        self._add_edge(a, b, [s, p])
                    continue
                if p in visited:
                    continue
                path = [s, p]
                visited.add(p)
                prev, cur = s, p
                while cur not in node_px:
                    nxt = [q for q in nbrs(cur) if q != prev]
                    prev, cur = cur, nxt[0]
                    if cur not in node_px:
                        visited.add(cur)
                    path.append(cur)
                self._add_edge(cluster_of[s], cluster_of[cur], path)

        # rings with no junctions or endpoints
        for p in cells:
            if p in node_px or p in visited:
                continue
            self.node_cell[nid] = p
            self.node_members[nid] = [p]
            self.junction[nid] = False
            visited.add(p)
            path = [p]
            prev, cur = p, nbrs(p)[0]
            while cur != p:
                visited.add(cur)
                path.append(cur)
                prev, cur = cur, next(q for q in nbrs(cur) if q != prev)
            path.append(p)
            self._add_edge(nid, nid, path)
            nid += 1
        self._next_node = nid

    def _add_edge(self, u, v, path):
        path = list(path)
        if path[0] != self.node_cell[u]:
            path.insert(0, self.node_cell[u])
        if path[-1] != self.node_cell[v]:
            path.append(self.node_cell[v])
        self.edges[self._next_edge] = _TopoEdge(u, v, path)
        self._next_edge += 1

    # -- queries ---------------------------------------------------------

    def degree(self, n) -> int:
        return sum((e.u == n) + (e.v == n) for e in self.edges.values())

    def incident(self, n) -> list[int]:
        return [k for k, e in self.edges.items() if e.u == n or e.v == n]

    def length(self, path) -> float:
        return _path_length(path) * self.res

    # -- optimizations -----------------------------------------------------

    def prune_spurs(self, min_length: float):
        if min_length <= 0:
            return
        while True:
            spurs = []
            for k, e in self.edges.items():
                if e.u == e.v:
                    continue
                du, dv = self.degree(e.u), self.degree(e.v)
                if (du == 1 and dv >= 3) or (dv == 1 and du >= 3):
                    length = self.length(e.path)
                    if length < min_length:
                        spurs.append((length, min(e.path), k))
            if not spurs:
                return
            _, _, k = min(spurs)
            e = self.edges.pop(k)
            tip = e.u if self.degree(e.u) == 0 else e.v
            self._drop_node(tip)
            self.dissolve_degree_two()

    def dissolve_degree_two(self):
        changed = True
        while changed:
            changed = False
            for n in sorted(self.node_cell):
                inc = self.incident(n)
                if len(inc) != 2 or self.degree(n) != 2:
                    continue
                a, b = (self.edges[k] for k in inc)
                pa = a.path if a.v == n else a.path[::-1]
                pb = b.path if b.u == n else b.path[::-1]
                x = a.u if a.v == n else a.v
                y = b.v if b.u == n else b.u
                for k in inc:
                    del self.edges[k]
                self._drop_node(n)
                self.edges[self._next_edge] = _TopoEdge(x, y, pa + pb[1:])
                self._next_edge += 1
                changed = True
                break

    def merge_crossings(self, radius: float, skeleton_cells: np.ndarray):
        if radius <= 0:
            return
        junctions = sorted(n for n in self.node_cell if self.degree(n) >= 3)
        parent = {n: n for n in junctions}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, a in enumerate(junctions):
            for b in junctions[i + 1 :]:
                if _cell_dist(self.node_cell[a], self.node_cell[b]) * self.res < radius:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for n in junctions:
            groups.setdefault(find(n), []).append(n)

        for root, members in sorted(groups.items()):
            if len(members) < 2:
                continue
            centroid = _centroid([self.node_cell[n] for n in members])
            cell = _snap(centroid, skeleton_cells)
            new = self._next_node
            self._next_node += 1
            self.node_cell[new] = cell
            self.node_members[new] = [cell]
            self.junction[new] = True
            group = set(members)
            for k in sorted(self.edges):
                e = self.edges[k]
                if e.u not in group and e.v not in group:
                    continue
                path = list(e.path)
                if e.u in group:
                    path.insert(0, cell)
                    e.u = new
                if e.v in group:
                    path.append(cell)
                    e.v = new
                e.path = _dedupe_consecutive(path)
                if e.u == e.v == new:
                    reach = max(_cell_dist(q, cell) for q in e.path) * self.res
                    if reach < radius:
                        del self.edges[k]
            for n in members:
                self._drop_node(n)
        self.dissolve_degree_two()

    def _drop_node(self, n):
        self.node_cell.pop(n, None)
        self.node_members.pop(n, None)
        self.junction.pop(n, None)


def _path_length(path) -> float:
    return sum(_cell_dist(a, b) for a, b in zip(path, path[1:]))


def _cell_dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _centroid(cells) -> tuple[float, float]:
    arr = np.asarray(cells, dtype=np.float64)
    return float(arr[:, 0].mean()), float(arr[:, 1].mean())


def _snap(point, cells) -> tuple[int, int]:
    arr = np.asarray(sorted(map(tuple, np.asarray(cells).tolist())), dtype=np.int64)
    d = np.hypot(arr[:, 0] - point[0], arr[:, 1] - point[1])
    r, c = arr[int(np.argmin(d))]
    return int(r), int(c)


def _dedupe_consecutive(path):
    out = [path[0]]
    for p in path[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def segment_is_clear(free: np.ndarray, a, b, step: float = 0.25) -> bool:
    """True when every sample along the cell-space chord ``a``-``b`` is free.

    ``a`` and ``b`` are ``(row, col)`` in cell units (cell centers at
    integers); samples are spaced ``step`` cells apart.
    """
    (ra, ca), (rb, cb) = a, b
    n = max(1, int(math.ceil(math.hypot(rb - ra, cb - ca) / step)))
    t = np.linspace(0.0, 1.0, n + 1)
    rows = np.floor(ra + (rb - ra) * t + 0.5).astype(np.int64)
    cols = np.floor(ca + (cb - ca) * t + 0.5).astype(np.int64)
    h, w = free.shape
    if rows.min() < 0 or cols.min() < 0 or rows.max() >= h or cols.max() >= w:
        return False
    return bool(free[rows, cols].all())


def _subdivide(path, res, segment_length, free) -> list:
    """Cells of ``path`` chosen as graph nodes, ends included."""
    m = len(path) - 1
    if m < 1:
        return []
    closed = path[0] == path[-1]
    if closed and m < 3:
        return []
    steps = [_cell_dist(a, b) * res for a, b in zip(path, path[1:])]
    arc = np.concatenate(([0.0], np.cumsum(steps)))
    total = float(arc[-1])
    k = max(math.ceil(total / segment_length - 1e-9), 3 if closed else 1)
    while k < m:
        targets = total * np.arange(1, k) / k
        idx = np.searchsorted(arc, targets)
        idx = np.where((idx > 0) & (targets - arc[np.maximum(idx - 1, 0)] <= arc[np.minimum(idx, m)] - targets), idx - 1, idx)
        picks = [0, *idx.tolist(), m]
        if all(b > a for a, b in zip(picks, picks[1:])) and all(
            _cell_dist(path[a], path[b]) * res <= segment_length + 1e-9 and segment_is_clear(free, path[a], path[b])
            for a, b in zip(picks, picks[1:])
        ):
            return [path[i] for i in picks]
        k += 1
    return list(path)


def build_raw_graph(skeleton: Skeleton, params: SkeletonParams = SkeletonParams()) -> RawGraph:
    """Turn a pixel skeleton into a connected, subdivided node/edge graph."""
    cells = skeleton.cells()
    if not cells:
        raise NoSkeletonError("no skeleton: skeleton is empty")
    grid = skeleton.grid
    res = grid.resolution
    topo = _Topology(skeleton)
    topo.prune_spurs(params.end_segment_min_length)
    topo.merge_crossings(params.crossing_merge_radius, np.asarray(cells))

    node_set = set(topo.node_cell.values())
    cell_edges = set()
    for k in sorted(topo.edges):
        picks = _subdivide(topo.edges[k].path, res, params.segment_length, grid.free_mask)
        node_set.update(picks)
        for a, b in zip(picks, picks[1:]):
            if a != b:
                cell_edges.add((min(a, b), max(a, b)))

    node_cells = sorted(node_set)
    comps = _components(node_cells, cell_edges)
    dropped = len(comps) - 1
    if dropped:
        log.warning("distillation dropped %d disconnected graph component(s)", dropped)
    keep = set(min(comps, key=lambda comp: (-len(comp), comp[0])))
    node_cells = [p for p in node_cells if p in keep]
    index = {p: i for i, p in enumerate(node_cells)}
    edges = sorted(
        (min(index[a], index[b]), max(index[a], index[b])) for a, b in cell_edges if a in index and b in index
    )
    h = grid.height_cells
    nodes = [((c + 0.5) * res, (h - 1 - r + 0.5) * res) for r, c in node_cells]
    return RawGraph(nodes, edges, node_cells, dropped)


def _components(nodes, edges) -> list[list]:
    adj = {p: [] for p in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen, comps = set(), []
    for p in nodes:
        if p in seen:
            continue
        comp, stack = [], [p]
        seen.add(p)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    return comps


def distill(grid: OccupancyGrid, params: SkeletonParams = SkeletonParams()) -> RawGraph:
    """Grid to raw roadmap graph in one call."""
    skeleton = extract_skeleton(distance_transform(grid), params)
    return build_raw_graph(skeleton, params)


def save_raw_graph(graph: RawGraph, path) -> Path:
    path = Path(path)
    path.write_text(graph.to_json() + "\n", encoding="utf-8")
    return path
