import numpy as np
import pytest

from conftest import grid_from
from graphs import graph_from, line_graph, plus_graph
from gmcpos.coverage import acp
from gmcpos.distill import distill
from gmcpos.errors import ScenarioError
from gmcpos.fixtures import SCENARIOS, load_fixture
from gmcpos.mapio import OccupancyGrid
from gmcpos.oracle import audit_placement, exhaustive_best_acp
from gmcpos.planner import (
    Scenario,
    candidate_set,
    compute_alpha,
    max_degree_subset,
    select_positions,
)
from gmcpos.roadmap import finalize_graph


def free_grid(h, w, resolution=1.0):
    return OccupancyGrid(np.zeros((h, w), dtype=np.uint8), resolution)


@pytest.fixture(scope="module")
def loop():
    grid = load_fixture("loop_corridor")
    return grid, finalize_graph(distill(grid), grid.origin)


def test_compute_alpha_examples():
    assert compute_alpha(free_grid(10, 20, 1.0), 2) == 10.0
    assert compute_alpha(free_grid(122, 122, 0.1), 3) == pytest.approx(4.0667, abs=1e-4)
    assert compute_alpha(free_grid(2338, 3737, 0.01), 5) == pytest.approx(7.474, abs=1e-9)
    with pytest.raises(ValueError):
        compute_alpha(free_grid(3, 3), 0)


def test_candidate_set_line():
    g = line_graph(10)
    P = (0.0, 0.0)
    assert candidate_set(g, P, [P], r=5.0, alpha=2.0) == set(range(2, 10))
    # node 5 is taken: drop it and everything closer than 2 to it
    sel = [P, g.nodes[5]]
    assert candidate_set(g, P, sel, r=5.0, alpha=2.0, excluded=[5]) == {2, 3, 7, 8, 9}


def test_candidate_set_single_node_is_empty():
    g = graph_from([(0.0, 0.0)], [])
    assert candidate_set(g, (0.0, 0.0), [(0.0, 0.0)], r=6.0, alpha=1.0) == set()


def test_max_degree_subset():
    g = plus_graph(arm=2)
    assert max_degree_subset(g, {1, 3, 5}) == {1, 3, 5}
    assert max_degree_subset(g, {0, 1, 2}) == {0}
    assert max_degree_subset(g, {2}) == {2}
    star = graph_from([(0, 0), (1, 0), (2, 0), (0, 1), (5, 5), (5, 6), (6, 5), (5, 4)],
                      [(0, 1), (1, 2), (0, 3), (2, 4), (4, 5), (4, 6), (2, 7)])
    assert sorted(star.node_degree[v] for v in (3, 1, 2, 4)) == [1, 2, 3, 3]
    assert max_degree_subset(star, {3, 1, 2, 4}) == {2, 4}
    with pytest.raises(ValueError):
        max_degree_subset(g, set())


def test_plus_shaped_graph():
    g = plus_graph(arm=6)
    grid = free_grid(12, 12)
    res = select_positions(g, grid, Scenario((6.0, 6.0), 2, 6.0))
    tips = [6, 12, 18, 24]
    assert all(g.node_degree[t] == 1 for t in tips)
    assert res.alpha == 6.0
    assert res.nodes[0] == 6
    assert res.nodes[1] in tips[1:]
    assert res.fallback_steps == []
    assert audit_placement(g, grid, Scenario((6.0, 6.0), 2, 6.0), res) == []


def test_single_node_then_exhaustion():
    g = graph_from([(9.5, 0.5)], [])
    grid = free_grid(1, 10)
    res = select_positions(g, grid, Scenario((0.5, 0.5), 3, 50.0))
    assert res.nodes == [0]
    assert res.exhausted
    assert res.steps[-1].fallback == "exhausted"


def test_fallback_is_recorded():
    g = line_graph(4)
    grid = free_grid(1, 40)
    sc = Scenario((0.5, 0.5), 2, 6.0)  # alpha = 20 but the graph spans 3 m
    res = select_positions(g, grid, sc)
    assert len(res.nodes) == 2
    assert res.fallback_steps == [0, 1]
    assert {s.fallback for s in res.steps} <= {"alpha", "spread"}
    assert audit_placement(g, grid, sc, res) == []


def test_operator_outside_map():
    with pytest.raises(ScenarioError):
        select_positions(line_graph(3), free_grid(3, 3), Scenario((10.0, 1.0), 1))


def test_loop_fixture_covers_everything(loop):
    grid, g = loop
    spec = SCENARIOS["loop-1A"]
    sc = Scenario(spec.operator, 3, 6.0)
    res = select_positions(g, grid, sc)
    assert [g.node_degree[v] for v in res.nodes] == [3, 3, 3]
    assert acp(grid, res.positions, sc.operator, 6.0, "free").acp == 100.0
    assert audit_placement(g, grid, sc, res) == []
    # an exhaustive search over the junction nodes agrees full coverage is reachable
    junctions = [v for v in range(len(g)) if g.node_degree[v] == 3]
    best = max(
        acp(grid, [g.nodes[a], g.nodes[b], g.nodes[c]], sc.operator, 6.0, "free").acp
        for i, a in enumerate(junctions) for j, b in enumerate(junctions[i + 1:], i + 1) for c in junctions[j + 1:]
    )
    assert best == 100.0


def test_anchor_schedule_and_determinism(loop):
    grid, g = loop
    sc = Scenario(SCENARIOS["loop-1B"].operator, 5, 6.0)
    a, b = select_positions(g, grid, sc), select_positions(g, grid, sc)
    assert a.to_json() == b.to_json()
    P = tuple(sc.operator)
    expected = [P, P] + [tuple(g.nodes[v]) for v in a.nodes[:-2]]
    assert [tuple(x) for x in a.anchors] == expected[: len(a.anchors)]
    for v, p in zip(a.nodes, a.positions):
        assert p == g.nodes[v]


def test_result_json_shape(loop):
    grid, g = loop
    res = select_positions(g, grid, Scenario(SCENARIOS["loop-1A"].operator, 3))
    d = res.to_dict()
    assert {"alpha", "positions", "anchors", "fallback_steps"} <= set(d)
