import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import grid_from
from gmcpos.distill import (
    ClearanceField,
    RawGraph,
    Skeleton,
    SkeletonParams,
    build_raw_graph,
    distance_transform,
    distill,
    extract_skeleton,
)
from gmcpos.errors import NoSkeletonError
from gmcpos.fixtures import random_room_map
from gmcpos.mapio import CellState, OccupancyGrid, parse_ascii
from gmcpos.oracle import brute_force_clearance


def ridge_cells(clear: np.ndarray) -> set:
    """Cells that are a local maximum along at least one of the four line directions."""
    h, w = clear.shape

    def at(r, c):
        return clear[r, c] if 0 <= r < h and 0 <= c < w else 0.0

    out = set()
    for r in range(h):
        for c in range(w):
            v = clear[r, c]
            if v <= 0:
                continue
            for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                a, b = at(r - dr, c - dc), at(r + dr, c + dc)
                if v >= a and v >= b and (v > a or v > b):
                    out.add((r, c))
                    break
    return out


# -- distance transform ------------------------------------------------------

def test_clearance_adjacent_obstacle():
    clear = distance_transform(grid_from("#.#")).values
    assert clear[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert clear[0, 0] == clear[0, 2] == 0.0


def test_clearance_corner_obstacles():
    g = grid_from("#...#\n.....\n.....\n.....\n#...#")
    clear = distance_transform(g).values
    # corner cells at Chebyshev offset (2, 2) beat the virtual border at 3
    assert clear[2, 2] == pytest.approx(math.sqrt(8), abs=1e-9)
    assert np.allclose(clear, brute_force_clearance(g), atol=1e-9)


def test_clearance_all_free_uses_border():
    g = grid_from("\n".join(["......"] * 4), resolution=0.5)
    assert np.allclose(distance_transform(g).values, brute_force_clearance(g), atol=1e-9)
    assert distance_transform(g).values[1, 2] == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(
    rows=st.integers(1, 9).flatmap(lambda w: st.lists(st.text(".#?", min_size=w, max_size=w), min_size=1, max_size=9)).filter(
        lambda rows: any("." in r for r in rows)
    ),
    res=st.sampled_from([0.1, 0.5, 1.0]),
)
def test_clearance_matches_brute_force(rows, res):
    g = parse_ascii(f"resolution: {res}\n" + "\n".join(rows))
    clear = distance_transform(g).values
    assert np.abs(clear - brute_force_clearance(g)).max() <= 1e-9
    assert (clear[g.cells != CellState.FREE] == 0).all()


# -- skeleton -----------------------------------------------------------------

def test_corridor_skeleton_is_middle_row():
    g = grid_from("\n".join(["." * 20] * 3))
    sk = extract_skeleton(distance_transform(g), SkeletonParams(min_clearance=0.25))
    cells = set(sk.cells())
    middle = {(1, c) for c in range(1, 19)}
    assert middle <= cells
    # only the two corridor ends may stray from the middle row
    assert all(r == 1 or c in (0, 1, 18, 19) for r, c in cells)
    ridge = ridge_cells(brute_force_clearance(g))
    assert {p for p in cells if 1 < p[1] < 18} <= ridge


def test_square_room_skeleton_has_both_diagonals():
    g = grid_from("\n".join(["." * 11] * 11))
    sk = extract_skeleton(distance_transform(g), SkeletonParams(min_clearance=0.25))
    cells = set(sk.cells())
    ridge = ridge_cells(brute_force_clearance(g))
    diagonals = {(i, i) for i in range(11)} | {(i, 10 - i) for i in range(11)}
    assert diagonals <= ridge
    assert diagonals <= cells


def test_no_free_cells_raises():
    g = grid_from("#.#")
    empty = ClearanceField(np.zeros((1, 3)), g)
    with pytest.raises(NoSkeletonError):
        extract_skeleton(empty)


def test_min_clearance_too_large_names_parameter():
    g = grid_from("\n".join(["....."] * 5))
    with pytest.raises(NoSkeletonError) as err:
        extract_skeleton(distance_transform(g), SkeletonParams(min_clearance=10.0))
    assert err.value.parameter == "min_clearance"
    assert "min_clearance" in str(err.value)


def test_skeleton_connected_per_region():
    g = random_room_map(3)
    params = SkeletonParams()
    sk = extract_skeleton(distance_transform(g), params)
    from scipy import ndimage

    safe = (distance_transform(g).values >= params.min_clearance)
    regions, n = ndimage.label(safe, structure=np.ones((3, 3)))
    for k in range(1, n + 1):
        part = sk.mask & (regions == k)
        if part.any():
            _, pieces = ndimage.label(part, structure=np.ones((3, 3)))
            assert pieces == 1


# -- raw graph ----------------------------------------------------------------

def skeleton_from(cells, shape, resolution):
    g = OccupancyGrid(np.zeros(shape, np.uint8), resolution)
    mask = np.zeros(shape, bool)
    for p in cells:
        mask[p] = True
    return Skeleton(mask, distance_transform(g))


def degrees(raw: RawGraph) -> list[int]:
    deg = [0] * len(raw.nodes)
    for a, b in raw.edges:
        deg[a] += 1
        deg[b] += 1
    return deg


def test_straight_line_subdivision():
    # 21 cells at 0.5 m pitch -> a 10 m line; 10 / 2 = 5 segments
    sk = skeleton_from([(2, c) for c in range(21)], (5, 21), 0.5)
    raw = build_raw_graph(sk, SkeletonParams(segment_length=2.0, min_clearance=0.0))
    assert (len(raw.nodes), len(raw.edges)) == (6, 5)
    assert max(degrees(raw)) <= 2


def test_plus_has_single_degree_four_node():
    line = range(21)
    cells = {(10, c) for c in line} | {(r, 10) for r in line}
    sk = skeleton_from(cells, (21, 21), 0.5)
    raw = build_raw_graph(sk, SkeletonParams(segment_length=1.0))
    deg = degrees(raw)
    assert deg.count(4) == 1
    assert max(deg) == 4
    center = deg.index(4)
    assert raw.node_cells[center] == (10, 10)


def test_short_spur_is_pruned():
    params = SkeletonParams(segment_length=1.0, end_segment_min_length=1.0)
    line = [(10, c) for c in range(101)]
    spur = [(9, 50), (8, 50), (7, 50)]  # 0.3 m at 0.1 m cells
    with_spur = build_raw_graph(skeleton_from(line + spur, (20, 101), 0.1), params)
    without = build_raw_graph(skeleton_from(line, (20, 101), 0.1), params)
    assert len(with_spur.nodes) == len(without.nodes)
    assert with_spur.nodes == without.nodes
    assert max(degrees(with_spur)) == 2


def test_long_spur_is_kept():
    params = SkeletonParams(segment_length=1.0, end_segment_min_length=1.0)
    line = [(30, c) for c in range(101)]
    spur = [(30 - k, 50) for k in range(1, 21)]  # 2 m
    raw = build_raw_graph(skeleton_from(line + spur, (40, 101), 0.1), params)
    assert degrees(raw).count(3) == 1


def test_nearby_junctions_merge():
    # two T-junctions 0.5 m apart along a line fuse into one crossing
    line = [(20, c) for c in range(61)]
    up = [(20 - k, 30) for k in range(1, 15)]
    down = [(20 + k, 35) for k in range(1, 15)]
    sk = skeleton_from(line + up + down, (40, 61), 0.1)
    merged = build_raw_graph(sk, SkeletonParams(crossing_merge_radius=0.6))
    apart = build_raw_graph(sk, SkeletonParams(crossing_merge_radius=0.0))
    assert degrees(merged).count(4) == 1
    assert degrees(apart).count(3) == 2


def test_ring_without_junctions():
    # thin 8-connected square ring: corners cut
    cells = [(2, c) for c in range(3, 29)] + [(29, c) for c in range(3, 29)]
    cells += [(r, 2) for r in range(3, 29)] + [(r, 29) for r in range(3, 29)]
    raw = build_raw_graph(skeleton_from(cells, (32, 32), 0.1), SkeletonParams(segment_length=1.0))
    assert set(degrees(raw)) == {2}
    assert len(raw.edges) == len(raw.nodes) >= 3


def test_largest_component_kept(caplog):
    g = grid_from("\n".join(["." * 12 + "#" + "." * 30] * 8), resolution=0.25)
    raw = distill(g)
    assert raw.dropped_components == 1
    assert "dropped 1" in caplog.text
    assert all(x > 3.25 for x, _ in raw.nodes)


def test_raw_graph_json_round_trip():
    raw = distill(random_room_map(1))
    again = RawGraph.from_dict(__import__("json").loads(raw.to_json()))
    assert again.nodes == raw.nodes and again.edges == raw.edges
    assert all(a != b for a, b in raw.edges)
    assert len({tuple(sorted(e)) for e in raw.edges}) == len(raw.edges)


@pytest.mark.parametrize("seed", [0, 5, 11])
def test_node_count_monotone_in_segment_length(seed):
    g = random_room_map(seed)
    counts = [len(distill(g, SkeletonParams(segment_length=s)).nodes) for s in (3.0, 2.0, 1.5, 1.0, 0.6, 0.3)]
    assert counts == sorted(counts)
