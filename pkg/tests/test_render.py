import numpy as np

from conftest import grid_from
from gmcpos.coverage import acp
from gmcpos.distill import distill
from gmcpos.fixtures import load_fixture
from gmcpos.render import DEFAULT_SCALE, UNCOVERED, render
from gmcpos.roadmap import finalize_graph


def test_image_size():
    grid = load_fixture("loop_corridor")
    g = finalize_graph(distill(grid))
    img = render(grid, g, [], (1.3, 1.3), 6.0)
    assert img.size == (grid.width_cells * DEFAULT_SCALE, grid.height_cells * DEFAULT_SCALE)
    assert render(grid, None, [], (1.3, 1.3), 6.0, scale=3).size == (366, 366)


def test_empty_placement_shows_operator_disk():
    grid = grid_from("\n".join(["." * 20] * 20))
    img = np.asarray(render(grid, None, [], (10.0, 10.0), 5.0, scale=4))
    # a pixel inside the disk but away from the marker is tinted yellow
    r, g, b = img[20, 40]
    assert r > b and g > b


def test_full_coverage_has_no_uncovered_tint(tmp_path):
    grid = grid_from("\n".join(["." * 10] * 10))
    rep = acp(grid, [], (5.0, 5.0), 20.0)
    img = np.asarray(render(grid, None, [], (5.0, 5.0), 20.0, rep.mask, tmp_path / "x.png", scale=2))
    assert (tmp_path / "x.png").exists()
    assert not (img == np.array(UNCOVERED, dtype=np.uint8)).all(axis=-1).any()


def test_uncovered_cells_are_tinted():
    grid = grid_from("\n".join(["." * 30] * 3))
    rep = acp(grid, [], (0.5, 0.5), 1.0)
    img = np.asarray(render(grid, None, [], (0.5, 0.5), 1.0, rep.mask, scale=1))
    assert tuple(img[1, 29]) == UNCOVERED
