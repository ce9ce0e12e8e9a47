"""Small graph builders shared by tests."""

import math

import numpy as np

from gmcpos.distill import RawGraph
from gmcpos.mapio import WorldPoint
from gmcpos.roadmap import RoadmapGraph, finalize_graph


def graph_from(points, edges) -> RoadmapGraph:
    return finalize_graph(RawGraph([tuple(map(float, p)) for p in points], [tuple(e) for e in edges]))


def weighted_graph(points, weighted_edges) -> RoadmapGraph:
    """Graph with arbitrary weights (bypasses the Euclidean weighting)."""
    nodes = [WorldPoint(float(x), float(y)) for x, y in points]
    adj = [[] for _ in nodes]
    for u, v, w in weighted_edges:
        adj[u].append((v, float(w)))
        adj[v].append((u, float(w)))
    return RoadmapGraph(nodes, adj)


def random_connected_graph(rng, max_nodes=20) -> RoadmapGraph:
    n = int(rng.integers(1, max_nodes + 1))
    pts = rng.uniform(-10, 10, size=(n, 2))
    edges = set()
    order = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        a, b = int(order[i]), int(order[j])
        edges.add((min(a, b), max(a, b)))
    for _ in range(int(rng.integers(0, 2 * n + 1))):
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return graph_from(pts, sorted(edges))


def line_graph(n, spacing=1.0):
    return graph_from([(i * spacing, 0.0) for i in range(n)], [(i, i + 1) for i in range(n - 1)])


def plus_graph(arm=6, spacing=1.0, center=(6.0, 6.0)):
    """Degree-4 center with four arms of ``arm`` nodes each."""
    cx, cy = center
    pts = [(cx, cy)]
    edges = []
    for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        prev = 0
        for k in range(1, arm + 1):
            pts.append((cx + dx * k * spacing, cy + dy * k * spacing))
            edges.append((prev, len(pts) - 1))
            prev = len(pts) - 1
    return graph_from(pts, edges)


def euclid(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])
