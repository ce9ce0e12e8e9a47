"""Recursive degree/distance node selection for robot placement.

Step ``i`` picks a node around an anchor ``eta`` (the operator for the first
two robots, then the robot placed two steps earlier).  The candidates are the
unselected nodes with ``d_G(v, eta) < 2r`` that are at least ``alpha`` away
(in ``d_G``) from the operator and from every robot placed so far.  Among the
candidates with the highest node degree, the one furthest from ``eta`` wins;
remaining ties go to the lowest node index.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from gmcpos.errors import ScenarioError
from gmcpos.mapio import OccupancyGrid, WorldPoint
from gmcpos.roadmap import RoadmapGraph, distances_to_point

DEFAULT_RADIUS = 6.0


@dataclass(frozen=True)
class Scenario:
    operator: WorldPoint
    robot_count: int
    coverage_radius: float = DEFAULT_RADIUS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "operator", WorldPoint(float(self.operator[0]), float(self.operator[1])))
        if not all(math.isfinite(v) for v in self.operator):
            raise ScenarioError(f"operator position must be finite, got {self.operator}")
        if int(self.robot_count) != self.robot_count or self.robot_count < 1:
            raise ScenarioError(f"robot_count must be a positive integer, got {self.robot_count}")
        if not (math.isfinite(self.coverage_radius) and self.coverage_radius > 0):
            raise ScenarioError(f"coverage_radius must be > 0, got {self.coverage_radius}")
        if not 0 <= int(self.seed) < 2**64:
            raise ScenarioError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass
class StepRecord:
    step: int
    anchor: WorldPoint
    node: int | None
    alpha_used: float
    fallback: str | None = None  # None, "alpha", "spread" or "exhausted"


@dataclass
class PlacementResult:
    positions: list[WorldPoint]
    nodes: list[int]
    anchors: list[WorldPoint]
    fallback_steps: list[int]
    alpha: float
    exhausted: bool = False
    steps: list[StepRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "positions": [[p.x, p.y] for p in self.positions],
            "nodes": list(self.nodes),
            "anchors": [[p.x, p.y] for p in self.anchors],
            "fallback_steps": list(self.fallback_steps),
            "exhausted": self.exhausted,
            "steps": [
                {**asdict(s), "anchor": [s.anchor.x, s.anchor.y]} for s in self.steps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def compute_alpha(grid: OccupancyGrid, n: int) -> float:
    """Spread distance: the longer map side divided by the robot count."""
    if n < 1:
        raise ValueError(f"robot count must be >= 1, got {n}")
    return max(grid.height_cells * grid.resolution, grid.width_cells * grid.resolution) / n


def candidate_set(g: RoadmapGraph, eta, selected, r: float, alpha: float, excluded=()) -> set[int]:
    """Nodes within ``2r`` of ``eta`` and at least ``alpha`` from every point in ``selected``.

    ``selected`` holds the operator plus the positions chosen so far;
    ``excluded`` are node indices already taken.
    """
    ok = distances_to_point(g, eta) < 2 * r
    for lam in selected:
        ok &= distances_to_point(g, lam) >= alpha
    out = set(np.flatnonzero(ok).tolist())
    return out - set(excluded)


def max_degree_subset(g: RoadmapGraph, candidates) -> set[int]:
    if not candidates:
        raise ValueError("max_degree_subset needs a non-empty candidate set; run the fallback first")
    degree = g.node_degree
    best = max(degree[v] for v in candidates)
    return {v for v in candidates if degree[v] == best}


def _furthest(g: RoadmapGraph, nodes, eta) -> int:
    d = distances_to_point(g, eta)
    return min(nodes, key=lambda v: (-d[v], v))


def select_positions(g: RoadmapGraph, grid: OccupancyGrid, sc: Scenario) -> PlacementResult:
    if not grid.contains(sc.operator):
        raise ScenarioError(
            f"operator {tuple(sc.operator)} lies outside the map "
            f"[{grid.origin.x}, {grid.origin.x + grid.width_m}] x [{grid.origin.y}, {grid.origin.y + grid.height_m}]"
        )
    P = sc.operator
    r = sc.coverage_radius
    alpha = compute_alpha(grid, sc.robot_count)
    chosen: list[int] = []
    anchors: list[WorldPoint] = []
    steps: list[StepRecord] = []
    fallback_steps: list[int] = []
    exhausted = False

    for i in range(sc.robot_count):
        eta = P if i < 2 else g.nodes[chosen[i - 2]]
        anchors.append(WorldPoint(*eta))
        selected = [P] + [g.nodes[v] for v in chosen]
        pick, used, how = _select_step(g, grid, eta, selected, chosen, r, alpha)
        steps.append(StepRecord(i, WorldPoint(*eta), pick, used, how))
        if how is not None:
            fallback_steps.append(i)
        if pick is None:
            exhausted = True
            anchors.pop()
            break
        chosen.append(pick)

    return PlacementResult(
        positions=[g.nodes[v] for v in chosen],
        nodes=chosen,
        anchors=anchors,
        fallback_steps=fallback_steps,
        alpha=alpha,
        exhausted=exhausted,
        steps=steps,
    )


def _select_step(g, grid, eta, selected, chosen, r, alpha):
    cand = candidate_set(g, eta, selected, r, alpha, chosen)
    if cand:
        return _furthest(g, max_degree_subset(g, cand), eta), alpha, None

    # relaxation 1: shrink the spread distance while it stays above one cell
    relaxed = alpha / 2
    while relaxed >= grid.resolution:
        cand = candidate_set(g, eta, selected, r, relaxed, chosen)
        if cand:
            return _furthest(g, max_degree_subset(g, cand), eta), relaxed, "alpha"
        relaxed /= 2

    # relaxation 2: any free node, as far as possible from everything placed
    remaining = np.ones(len(g), dtype=bool)
    remaining[list(chosen)] = False
    if not remaining.any():
        return None, alpha, "exhausted"
    spread = np.full(len(g), np.inf)
    for lam in selected:
        spread = np.minimum(spread, distances_to_point(g, lam))
    idx = np.flatnonzero(remaining)
    best = idx[np.argmax(spread[idx])]
    return int(best), 0.0, "spread"
