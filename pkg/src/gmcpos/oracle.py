"""Slow, independent reference computations used to check the fast paths.

Nothing here is used by the planning pipeline itself.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from gmcpos.errors import GmcPosError
from gmcpos.mapio import CellState, OccupancyGrid

FW_NODE_LIMIT = 512
SUBSET_LIMIT = 2_000_000
AUDIT_TOL = 1e-9


class OracleGuardError(GmcPosError):
    """Instance too large for an exhaustive oracle."""


def floyd_warshall(g) -> np.ndarray:
    n = len(g.nodes)
    if n > FW_NODE_LIMIT:
        raise OracleGuardError(f"floyd_warshall is limited to {FW_NODE_LIMIT} nodes, graph has {n}")
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, nbrs in enumerate(g.adjacency):
        for v, w in nbrs:
            if w < dist[u, v]:
                dist[u, v] = w
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def brute_force_clearance(grid: OccupancyGrid) -> np.ndarray:
    """All-pairs scan: distance from each free cell center to the closest
    non-free cell center, including a virtual obstacle ring around the map."""
    h, w = grid.cells.shape
    blocked = [(r, c) for r in range(h) for c in range(w) if grid.cells[r, c] != CellState.FREE]
    blocked += [(r, -1) for r in range(-1, h + 1)] + [(r, w) for r in range(-1, h + 1)]
    blocked += [(-1, c) for c in range(w)] + [(h, c) for c in range(w)]
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            if grid.cells[r, c] == CellState.FREE:
                out[r, c] = min(math.hypot(r - br, c - bc) for br, bc in blocked) * grid.resolution
    return out


def brute_force_acp(grid: OccupancyGrid, positions, operator, r: float, universe: str = "known") -> tuple[int, int, float]:
    """Per-cell double loop; returns ``(A, A_cover, ACP)``."""
    h, w = grid.cells.shape
    centers = [operator, *positions]
    total = covered = 0
    for row in range(h):
        for col in range(w):
            state = grid.cells[row, col]
            if state == CellState.UNKNOWN or (universe == "free" and state != CellState.FREE):
                continue
            total += 1
            x = grid.origin.x + (col + 0.5) * grid.resolution
            y = grid.origin.y + (h - 1 - row + 0.5) * grid.resolution
            if any(math.hypot(x - p[0], y - p[1]) <= r for p in centers):
                covered += 1
    return total, covered, 100.0 * covered / total


@dataclass
class ExhaustiveResult:
    acp: float
    nodes: tuple[int, ...]
    subsets: int


def exhaustive_best_acp(grid: OccupancyGrid, g, operator, n: int, r: float, universe: str = "known") -> ExhaustiveResult:
    """Best ACP over every ``n``-subset of graph nodes (first subset wins ties)."""
    v = len(g.nodes)
    if n < 0 or n > v:
        raise ValueError(f"n must lie in [0, {v}], got {n}")
    subsets = math.comb(v, n)
    if subsets > SUBSET_LIMIT:
        raise OracleGuardError(f"C({v}, {n}) = {subsets} subsets exceeds the limit of {SUBSET_LIMIT}")
    universe_mask = grid.universe_mask(universe)
    total = int(universe_mask.sum())
    xs, ys = grid.cell_centers()
    xs, ys = xs[universe_mask], ys[universe_mask]

    def bits(p) -> int:
        covered = np.hypot(xs - p[0], ys - p[1]) <= r
        return int.from_bytes(np.packbits(covered).tobytes(), "big")

    base = bits(operator)
    node_bits = [bits(p) for p in g.nodes]
    best = [-1, ()]

    def search(start, depth, acc, chosen):
        if depth == n:
            count = acc.bit_count()
            if count > best[0]:
                best[0], best[1] = count, tuple(chosen)
            return
        for i in range(start, v - (n - depth) + 1):
            chosen.append(i)
            search(i + 1, depth + 1, acc | node_bits[i], chosen)
            chosen.pop()

    search(0, 0, base, [])
    return ExhaustiveResult(100.0 * best[0] / total, best[1], subsets)


def audit_placement(g, grid: OccupancyGrid, scenario, result) -> list[str]:
    """Re-derive every selection rule from scratch; return the violations found.

    Distances come from Floyd-Warshall and a scalar nearest-node scan, so the
    check shares no code with the planner.  Comparisons carry a 1e-9 slack to
    absorb summation-order differences between the two shortest-path routes.
    """
    table = floyd_warshall(g)
    nodes = [(float(p[0]), float(p[1])) for p in g.nodes]
    degree = [len(a) for a in g.adjacency]
    tol = AUDIT_TOL

    @functools.lru_cache(maxsize=None)
    def nearest(p):
        best_i, best_d = 0, math.inf
        for i, (x, y) in enumerate(nodes):
            d = math.hypot(x - p[0], y - p[1])
            if d < best_d:
                best_i, best_d = i, d
        return best_i, best_d

    def d_g(v, p):
        j, hop = nearest(tuple(p))
        return table[v, j] + hop

    problems = []
    P = (float(scenario.operator[0]), float(scenario.operator[1]))
    r = scenario.coverage_radius
    alpha = max(grid.height_cells * grid.resolution, grid.width_cells * grid.resolution) / scenario.robot_count
    if abs(alpha - result.alpha) > tol:
        problems.append(f"alpha {result.alpha} != {alpha}")

    chosen = list(result.nodes)
    if len(set(chosen)) != len(chosen):
        problems.append("duplicate nodes selected")
    for i, v in enumerate(chosen):
        if tuple(result.positions[i]) != nodes[v]:
            problems.append(f"step {i}: position is not bit-equal to node {v}")
        expected_anchor = P if i < 2 else nodes[chosen[i - 2]]
        if tuple(result.anchors[i]) != expected_anchor:
            problems.append(f"step {i}: anchor {tuple(result.anchors[i])} != {expected_anchor}")
        if i in result.fallback_steps:
            continue
        eta = expected_anchor
        previous = [P] + [nodes[u] for u in chosen[:i]]
        taken = set(chosen[:i])
        if not d_g(v, eta) < 2 * r + tol:
            problems.append(f"step {i}: d_G to anchor {d_g(v, eta)} >= 2r")
        for lam in previous:
            if not d_g(v, lam) >= alpha - tol:
                problems.append(f"step {i}: d_G to {lam} = {d_g(v, lam)} < alpha {alpha}")
        inner = [
            u for u in range(len(nodes))
            if u not in taken
            and d_g(u, eta) < 2 * r - tol
            and all(d_g(u, lam) >= alpha + tol for lam in previous)
        ]
        if inner and degree[v] < max(degree[u] for u in inner):
            problems.append(f"step {i}: degree {degree[v]} below candidate maximum {max(degree[u] for u in inner)}")
        peers = [u for u in inner if degree[u] == degree[v]]
        if peers and d_g(v, eta) < max(d_g(u, eta) for u in peers) - tol:
            problems.append(f"step {i}: node {v} is not the furthest max-degree candidate")
    if not result.exhausted and len(chosen) != scenario.robot_count:
        problems.append(f"{len(chosen)} positions for {scenario.robot_count} robots without exhaustion flag")
    return problems
