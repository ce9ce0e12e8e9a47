"""Bundled synthetic maps and scenarios.

``loop_corridor`` is a 12.2 m x 12.2 m square loop corridor; ``multi_room`` is
a 37.4 m x 23.4 m floor with a long central corridor and rooms on both sides.
Both are stand-ins for the kinds of maps the method targets, not copies of
any particular survey.  Operator coordinates for the scenarios are our own
reading of "bottom left", "right side", etc.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from gmcpos.mapio import CellState, OccupancyGrid, WorldPoint, parse_ascii

FREE, OCC, UNKNOWN = CellState.FREE, CellState.OCCUPIED, CellState.UNKNOWN


def build_loop_corridor(size: int = 122, wall: int = 1, corridor: int = 24, resolution: float = 0.1) -> OccupancyGrid:
    """Square loop corridor around a central block.

    As in a scanned map, only the block's outer skin is occupied; its
    interior was never observed and stays unknown.
    """
    cells = np.full((size, size), OCC, dtype=np.uint8)
    cells[wall:-wall, wall:-wall] = FREE
    inner = wall + corridor
    cells[inner : size - inner, inner : size - inner] = OCC
    skin = inner + 2
    cells[skin : size - skin, skin : size - skin] = UNKNOWN
    return OccupancyGrid(cells, resolution)


def build_multi_room(resolution: float = 0.1) -> OccupancyGrid:
    """Central east-west corridor with four rooms above and four below."""
    h, w = 234, 374
    cells = np.full((h, w), OCC, dtype=np.uint8)
    t = 2  # wall thickness in cells
    cells[t:-t, t:-t] = FREE

    # corridor rows (row 0 is the top of the map)
    c_top, c_bot = 105, 129
    cells[c_top - t : c_top, t:-t] = OCC
    cells[c_bot : c_bot + t, t:-t] = OCC

    # room partitions above and below the corridor
    for x in (93, 186, 279):
        cells[t:c_top, x - t // 2 : x + t - t // 2] = OCC
        cells[c_bot:-t, x - t // 2 : x + t - t // 2] = OCC

    # doors: 1.2 m openings into the corridor, one per room
    door = 12
    for left, right in ((t, 93), (93, 186), (186, 279), (279, w - t)):
        mid = (left + right) // 2
        cells[c_top - t : c_top, mid - door // 2 : mid + door // 2] = FREE
        cells[c_bot : c_bot + t, mid - door // 2 : mid + door // 2] = FREE
    return OccupancyGrid(cells, resolution)


@dataclass(frozen=True)
class FixtureScenario:
    name: str
    map_name: str
    operator: WorldPoint
    robot_count: int
    note: str


SCENARIOS = {
    "loop-1A": FixtureScenario("loop-1A", "loop_corridor", WorldPoint(1.3, 1.3), 3, "bottom-left corner"),
    "loop-1B": FixtureScenario("loop-1B", "loop_corridor", WorldPoint(10.9, 10.9), 3, "top-right corner"),
    "rooms-3A": FixtureScenario("rooms-3A", "multi_room", WorldPoint(34.0, 11.7), 5, "right side, in the corridor"),
    "rooms-3B": FixtureScenario("rooms-3B", "multi_room", WorldPoint(3.4, 11.7), 6, "left side, in the corridor"),
}

BUILDERS = {"loop_corridor": build_loop_corridor, "multi_room": build_multi_room}


def fixture_path(name: str):
    return resources.files("gmcpos") / "data" / f"{name}.txt"


def load_fixture(name: str) -> OccupancyGrid:
    if name not in BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(BUILDERS)}")
    return parse_ascii(fixture_path(name).read_text(encoding="utf-8"), name=name)


def random_room_map(seed: int, resolution: float = 0.1) -> OccupancyGrid:
    """Random rectangular floor with a few internal walls and boxes."""
    rng = np.random.default_rng(seed)
    h = int(rng.integers(60, 140))
    w = int(rng.integers(60, 140))
    cells = np.full((h, w), OCC, dtype=np.uint8)
    cells[1:-1, 1:-1] = FREE
    for _ in range(int(rng.integers(1, 4))):
        if rng.random() < 0.5:
            r = int(rng.integers(15, h - 15))
            cells[r : r + 2, 1:-1] = OCC
            gap = int(rng.integers(5, w - 17))
            cells[r : r + 2, gap : gap + 12] = FREE
        else:
            c = int(rng.integers(15, w - 15))
            cells[1:-1, c : c + 2] = OCC
            gap = int(rng.integers(5, h - 17))
            cells[gap : gap + 12, c : c + 2] = FREE
    for _ in range(int(rng.integers(0, 4))):
        bh, bw = int(rng.integers(4, 12)), int(rng.integers(4, 12))
        r, c = int(rng.integers(8, h - bh - 8)), int(rng.integers(8, w - bw - 8))
        cells[r : r + bh, c : c + bw] = OCC
    return OccupancyGrid(cells, resolution)
