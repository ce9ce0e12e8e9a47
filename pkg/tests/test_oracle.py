import math

import numpy as np
import pytest

from graphs import graph_from, line_graph, random_connected_graph, weighted_graph
from conftest import grid_from
from gmcpos.coverage import acp
from gmcpos.oracle import OracleGuardError, exhaustive_best_acp, floyd_warshall


def test_floyd_single_node():
    assert floyd_warshall(graph_from([(0, 0)], [])).tolist() == [[0.0]]


def test_floyd_triangle():
    tri = weighted_graph([(0, 0), (1, 0), (2, 0)], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 10.0)])
    assert floyd_warshall(tri)[0, 2] == 2.0


def test_floyd_symmetric(rng):
    for _ in range(20):
        t = floyd_warshall(random_connected_graph(rng))
        assert np.array_equal(t, t.T)
        assert (np.diag(t) == 0).all()


def test_floyd_guard():
    with pytest.raises(OracleGuardError):
        floyd_warshall(line_graph(513))


def test_exhaustive_edge_cases():
    grid = grid_from("\n".join(["." * 10] * 3))
    g = graph_from([(x + 0.5, 1.5) for x in range(10)], [(i, i + 1) for i in range(9)])
    op = (0.5, 1.5)
    assert exhaustive_best_acp(grid, g, op, 0, 1.0).acp == acp(grid, [], op, 1.0).acp
    assert exhaustive_best_acp(grid, g, op, 10, 1.0).acp == acp(grid, g.nodes, op, 1.0).acp
    best = exhaustive_best_acp(grid, g, op, 2, 1.0)
    assert best.subsets == math.comb(10, 2)
    assert best.acp == max(
        acp(grid, [g.nodes[i], g.nodes[j]], op, 1.0).acp for i in range(10) for j in range(i + 1, 10)
    )


def test_exhaustive_guard():
    grid = grid_from("." * 40)
    g = graph_from([(x + 0.5, 0.5) for x in range(40)], [(i, i + 1) for i in range(39)])
    with pytest.raises(OracleGuardError):
        exhaustive_best_acp(grid, g, (0.5, 0.5), 20, 1.0)
