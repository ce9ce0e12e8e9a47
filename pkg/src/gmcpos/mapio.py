"""Occupancy-grid loading and world-coordinate helpers.

Two on-disk formats are understood:

* ROS ``map_server`` style: a YAML metadata file (``image``, ``resolution``,
  ``origin``, ``negate``, ``occupied_thresh``, ``free_thresh``) pointing at an
  8-bit grayscale raster (binary PGM, P5).
* A plain ASCII grid for fixtures and tests::

      resolution: 0.5
      origin: 10.0 20.0
      #.#
      .?.

  ``#`` is occupied, ``.`` free and ``?`` unknown.  The first grid line is the
  top of the map.

Image row 0 is the top of the picture, the map origin is its bottom-left
corner, so the world position of cell ``(row, col)`` is the cell center::

    x = origin.x + (col + 0.5) * resolution
    y = origin.y + (height - 1 - row + 0.5) * resolution
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import yaml
from PIL import Image

from gmcpos.errors import MapParseError, MapValidationError

ASCII_SYMBOLS = {".": 0, "#": 1, "?": 2}
SYMBOL_FOR_STATE = {v: k for k, v in ASCII_SYMBOLS.items()}

COVERAGE_UNIVERSES = ("known", "free")


class CellState(enum.IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


class WorldPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Immutable raster map.

    ``cells`` has shape ``(height_cells, width_cells)`` with values from
    :class:`CellState`; row 0 is the top row of the map.
    """

    cells: np.ndarray
    resolution: float
    origin: WorldPoint = WorldPoint(0.0, 0.0)
    _free: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.uint8, copy=True)
        if cells.ndim != 2 or cells.size == 0:
            raise MapValidationError(f"grid must be a non-empty 2D array, got shape {cells.shape}")
        if cells.max() > CellState.UNKNOWN:
            raise MapValidationError("grid contains values outside {0, 1, 2}")
        res = float(self.resolution)
        if not math.isfinite(res) or res <= 0:
            raise MapValidationError(f"resolution must be a positive finite number, got {self.resolution!r}")
        ox, oy = (float(v) for v in self.origin)
        if not (math.isfinite(ox) and math.isfinite(oy)):
            raise MapValidationError(f"origin must be finite, got {self.origin!r}")
        free = cells == CellState.FREE
        if not free.any():
            raise MapValidationError("map has no free cells")
        cells.flags.writeable = False
        free.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "origin", WorldPoint(ox, oy))
        object.__setattr__(self, "_free", free)

    @property
    def height_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def width_cells(self) -> int:
        return self.cells.shape[1]

    @property
    def width_m(self) -> float:
        return self.width_cells * self.resolution

    @property
    def height_m(self) -> float:
        return self.height_cells * self.resolution

    @property
    def free_mask(self) -> np.ndarray:
        return self._free

    @property
    def known_mask(self) -> np.ndarray:
        return self.cells != CellState.UNKNOWN

    def universe_mask(self, universe: str = "known") -> np.ndarray:
        """Cells counted by the coverage metric: ``known`` (free+occupied) or ``free``."""
        if universe == "known":
            return self.known_mask
        if universe == "free":
            return self.free_mask
        raise ValueError(f"unknown coverage universe {universe!r}; expected one of {COVERAGE_UNIVERSES}")

    def cell_center(self, row: int, col: int) -> WorldPoint:
        return WorldPoint(
            self.origin.x + (col + 0.5) * self.resolution,
            self.origin.y + (self.height_cells - 1 - row + 0.5) * self.resolution,
        )

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """World x and y of every cell center, each shaped like ``cells``."""
        rows, cols = np.indices(self.cells.shape, dtype=np.float64)
        xs = self.origin.x + (cols + 0.5) * self.resolution
        ys = self.origin.y + (self.height_cells - 1 - rows + 0.5) * self.resolution
        return xs, ys

    def contains(self, p) -> bool:
        x, y = p
        return (
            self.origin.x <= x <= self.origin.x + self.width_m
            and self.origin.y <= y <= self.origin.y + self.height_m
        )

    def world_to_cell(self, p) -> tuple[int, int] | None:
        """Cell containing ``p``; points on the far edges belong to the last cell."""
        if not self.contains(p):
            return None
        x, y = p
        col = min(int(math.floor((x - self.origin.x) / self.resolution)), self.width_cells - 1)
        from_bottom = min(int(math.floor((y - self.origin.y) / self.resolution)), self.height_cells - 1)
        return self.height_cells - 1 - from_bottom, col

    def state_at(self, p) -> CellState | None:
        cell = self.world_to_cell(p)
        if cell is None:
            return None
        return CellState(int(self.cells[cell]))

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.origin == other.origin
            and self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
        )

    __hash__ = None


def cell_sets(grid: OccupancyGrid) -> tuple[set[WorldPoint], set[WorldPoint]]:
    """Cell-center sets ``(known, free)``; unknown cells are in neither."""
    xs, ys = grid.cell_centers()
    known = grid.known_mask
    free = grid.free_mask
    known_pts = {WorldPoint(float(x), float(y)) for x, y in zip(xs[known], ys[known])}
    free_pts = {WorldPoint(float(x), float(y)) for x, y in zip(xs[free], ys[free])}
    return known_pts, free_pts


# --------------------------------------------------------------------------
# parsing


def parse_map(source) -> OccupancyGrid:
    """Load a map from a ``.yaml``/``.yml`` metadata file or an ASCII grid file."""
    path = Path(source)
    if not path.is_file():
        raise MapParseError(f"map file not found: {path}")
    if path.suffix.lower() in (".yaml", ".yml"):
        return _parse_ros_map(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MapParseError(f"cannot read {path}: {exc}") from exc
    return parse_ascii(text, name=str(path))


def occupancy_from_pixels(pixels: np.ndarray, negate: bool, occupied_thresh: float, free_thresh: float) -> np.ndarray:
    """Trinary map_server convention: p = (255 - v) / 255 (or v / 255 when negated)."""
    for name, value in (("occupied_thresh", occupied_thresh), ("free_thresh", free_thresh)):
        if not 0.0 <= value <= 1.0:
            raise MapParseError(f"{name} must lie in [0, 1], got {value}")
    v = pixels.astype(np.float64)
    p = v / 255.0 if negate else (255.0 - v) / 255.0
    cells = np.full(pixels.shape, CellState.UNKNOWN, dtype=np.uint8)
    cells[p > occupied_thresh] = CellState.OCCUPIED
    cells[p < free_thresh] = CellState.FREE
    return cells


def _parse_ros_map(path: Path) -> OccupancyGrid:
    try:
        meta = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise MapParseError(f"cannot read metadata {path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise MapParseError(f"{path}: metadata must be a mapping")
    for key in ("image", "resolution", "origin"):
        if key not in meta:
            raise MapParseError(f"{path}: missing key {key!r}")

    origin = meta["origin"]
    if not isinstance(origin, (list, tuple)) or len(origin) not in (2, 3):
        raise MapParseError(f"{path}: origin must be [x, y, theta]")
    try:
        origin = [float(v) for v in origin]
        resolution = float(meta["resolution"])
        negate = bool(int(meta.get("negate", 0)))
        occ = float(meta.get("occupied_thresh", 0.65))
        free = float(meta.get("free_thresh", 0.196))
    except (TypeError, ValueError) as exc:
        raise MapParseError(f"{path}: bad numeric field: {exc}") from exc
    if len(origin) == 3 and origin[2] != 0.0:
        raise MapValidationError(f"{path}: rotated maps are not supported (theta={origin[2]})")

    image_path = Path(meta["image"])
    if not image_path.is_absolute():
        image_path = path.parent / image_path
    pixels = _read_gray_image(image_path)
    cells = occupancy_from_pixels(pixels, negate, occ, free)
    return OccupancyGrid(cells, resolution, WorldPoint(origin[0], origin[1]))


def _read_gray_image(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MapParseError(f"map image not found: {path}")
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("L", "1", "P", "RGB", "RGBA", "LA"):
                raise MapParseError(f"{path}: unsupported image mode {img.mode}")
            pixels = np.asarray(img.convert("L"), dtype=np.uint8)
    except MapParseError:
        raise
    except (OSError, ValueError, SyntaxError) as exc:
        raise MapParseError(f"cannot decode map image {path}: {exc}") from exc
    if pixels.ndim != 2 or pixels.size == 0:
        raise MapParseError(f"{path}: image is empty")
    return pixels


_HEADER = re.compile(r"^\s*(resolution|origin)\s*:\s*(.*?)\s*$")


def parse_ascii(text: str, name: str = "<string>") -> OccupancyGrid:
    resolution = None
    origin = (0.0, 0.0)
    rows: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not rows:
            m = _HEADER.match(line)
            if m:
                key, value = m.groups()
                try:
                    if key == "resolution":
                        resolution = float(value)
                    else:
                        nums = [float(v) for v in re.split(r"[\s,]+", value.strip("[]() ")) if v]
                        if len(nums) not in (2, 3):
                            raise ValueError("expected 'x y' or 'x y theta'")
                        if len(nums) == 3 and nums[2] != 0.0:
                            raise MapValidationError(f"{name}: rotated maps are not supported")
                        origin = (nums[0], nums[1])
                except ValueError as exc:
                    raise MapParseError(f"{name}:{lineno}: bad {key} value {value!r}: {exc}") from exc
                continue
            if not line.strip():
                continue
        if not line.strip():
            # trailing blank lines are fine, interior ones are not
            rows.append("")
            continue
        rows.append(line)

    while rows and rows[-1] == "":
        rows.pop()
    if resolution is None:
        raise MapParseError(f"{name}: missing 'resolution:' header")
    if not rows:
        raise MapParseError(f"{name}: no grid rows")
    width = len(rows[0])
    cells = np.empty((len(rows), width), dtype=np.uint8)
    for r, line in enumerate(rows):
        if len(line) != width:
            raise MapParseError(f"{name}: row {r} has {len(line)} cells, expected {width}")
        for c, ch in enumerate(line):
            try:
                cells[r, c] = ASCII_SYMBOLS[ch]
            except KeyError:
                raise MapParseError(f"{name}: unknown cell symbol {ch!r} at row {r}, col {c}") from None
    return OccupancyGrid(cells, resolution, WorldPoint(*origin))


def to_ascii(grid: OccupancyGrid) -> str:
    lines = [
        f"resolution: {grid.resolution!r}",
        f"origin: {grid.origin.x!r} {grid.origin.y!r}",
    ]
    lookup = np.array([SYMBOL_FOR_STATE[i] for i in range(3)])
    lines.extend("".join(row) for row in lookup[grid.cells])
    return "\n".join(lines) + "\n"


def write_ascii(grid: OccupancyGrid, path) -> Path:
    path = Path(path)
    path.write_text(to_ascii(grid), encoding="utf-8", newline="\n")
    return path


def write_ros_map(grid: OccupancyGrid, yaml_path, image_name: str | None = None) -> Path:
    """Write ``grid`` as metadata YAML plus a P5 PGM (free=254, occupied=0, unknown=205)."""
    yaml_path = Path(yaml_path)
    image_name = image_name or yaml_path.with_suffix(".pgm").name
    pixels = np.choose(grid.cells, [254, 0, 205]).astype(np.uint8)
    Image.fromarray(pixels, mode="L").save(yaml_path.parent / image_name, format="PPM")
    meta = {
        "image": image_name,
        "resolution": grid.resolution,
        "origin": [grid.origin.x, grid.origin.y, 0.0],
        "negate": 0,
        "occupied_thresh": 0.65,
        "free_thresh": 0.196,
    }
    yaml_path.write_text(yaml.safe_dump(meta, sort_keys=False), encoding="utf-8")
    return yaml_path
