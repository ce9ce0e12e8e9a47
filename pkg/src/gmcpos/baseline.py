"""Conditional Random placement, the benchmark for graph-based selection.

Robots are dropped on free cells drawn uniformly from an annulus
``alpha <= d(o, anchor) < 2r`` (plain Euclidean distance).  The anchor follows
the same two-step recursion as the planner: the operator for the first two
robots, then the cell chosen two steps earlier.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gmcpos.coverage import acp
from gmcpos.errors import ScenarioError
from gmcpos.mapio import OccupancyGrid, WorldPoint
from gmcpos.planner import Scenario, compute_alpha
from gmcpos.rng import MASK64, SplitMix64

DEFAULT_ITERATIONS = 50


@dataclass
class RandomPlacement:
    positions: list[WorldPoint]
    seed: int
    exhausted_steps: list[int] = field(default_factory=list)
    skipped_steps: list[int] = field(default_factory=list)
    anchors: list[WorldPoint] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "positions": [[p.x, p.y] for p in self.positions],
            "anchors": [[p.x, p.y] for p in self.anchors],
            "exhausted_steps": list(self.exhausted_steps),
            "skipped_steps": list(self.skipped_steps),
        }


@dataclass
class BaselineSummary:
    iterations: int
    mean_acp: float
    min: float
    max: float
    stddev: float
    per_iteration: list[float]
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "mean_acp": self.mean_acp,
            "min": self.min,
            "max": self.max,
            "stddev": self.stddev,
            "per_iteration": list(self.per_iteration),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def annulus_candidates(xs: np.ndarray, ys: np.ndarray, available: np.ndarray, anchor, alpha: float, r: float) -> np.ndarray:
    """Indices (ascending) of available free cells with ``alpha <= d < 2r``."""
    d = np.hypot(xs - anchor[0], ys - anchor[1])
    return np.flatnonzero(available & (d >= alpha) & (d < 2 * r))


def conditional_random(grid: OccupancyGrid, sc: Scenario, seed: int | None = None) -> RandomPlacement:
    if not grid.contains(sc.operator):
        raise ScenarioError(f"operator {tuple(sc.operator)} lies outside the map")
    seed = sc.seed if seed is None else seed
    rng = SplitMix64(seed)
    cx, cy = grid.cell_centers()
    free = grid.free_mask
    # row-major order == ascending (row, col)
    xs, ys = cx[free], cy[free]
    available = np.ones(xs.size, dtype=bool)
    alpha = compute_alpha(grid, sc.robot_count)
    r = sc.coverage_radius
    P = sc.operator

    picks: list[int | None] = []
    out = RandomPlacement([], seed)
    for i in range(sc.robot_count):
        prior = picks[i - 2] if i >= 2 else None
        anchor = P if prior is None else WorldPoint(float(xs[prior]), float(ys[prior]))
        cand = annulus_candidates(xs, ys, available, anchor, alpha, r)
        if cand.size == 0:
            out.exhausted_steps.append(i)
            if anchor != P:
                anchor = P
                cand = annulus_candidates(xs, ys, available, anchor, alpha, r)
        out.anchors.append(anchor)
        if cand.size == 0:
            out.skipped_steps.append(i)
            picks.append(None)
            continue
        k = int(cand[rng.below(int(cand.size))])
        available[k] = False
        picks.append(k)
        out.positions.append(WorldPoint(float(xs[k]), float(ys[k])))
    return out


def _score(args) -> float:
    grid, sc, seed, universe = args
    placement = conditional_random(grid, sc, seed)
    return acp(grid, placement.positions, sc.operator, sc.coverage_radius, universe).acp


def average_acp(
    grid: OccupancyGrid,
    sc: Scenario,
    iterations: int = DEFAULT_ITERATIONS,
    universe: str = "known",
    workers: int = 1,
) -> BaselineSummary:
    """ACP statistics over runs seeded ``sc.seed, sc.seed + 1, ...``.

    ``stddev`` is the population standard deviation.  Results are ordered by
    iteration, so the worker count never changes the output.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    jobs = [(grid, sc, (sc.seed + k) & MASK64, universe) for k in range(iterations)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_score, jobs))
    else:
        scores = [_score(job) for job in jobs]
    return BaselineSummary(
        iterations=iterations,
        mean_acp=statistics.fmean(scores),
        min=min(scores),
        max=max(scores),
        stddev=statistics.pstdev(scores),
        per_iteration=scores,
        seed=sc.seed,
    )
