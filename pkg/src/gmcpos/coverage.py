"""Area coverage percentage of a placement.

Every robot and the operator covers the cells whose centers lie within
Euclidean distance ``r`` (inclusive).  No occlusion is modelled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from gmcpos.errors import MapValidationError
from gmcpos.mapio import OccupancyGrid


@dataclass(frozen=True)
class CoverageReport:
    total_cells: int
    covered_cells: int
    acp: float
    mask: np.ndarray
    universe: str = "known"

    def to_dict(self) -> dict:
        return {"A": self.total_cells, "A_cover": self.covered_cells, "acp": self.acp, "universe": self.universe}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def disk_mask(grid: OccupancyGrid, center, r: float, universe: str = "known") -> np.ndarray:
    """Boolean mask of universe cells within ``r`` of ``center``."""
    if not r > 0:
        raise ValueError(f"coverage radius must be > 0, got {r}")
    xs, ys = grid.cell_centers()
    return (np.hypot(xs - center[0], ys - center[1]) <= r) & grid.universe_mask(universe)


def covered_cells(grid: OccupancyGrid, center, r: float, universe: str = "known") -> set[tuple[int, int]]:
    rows, cols = np.nonzero(disk_mask(grid, center, r, universe))
    return set(zip(rows.tolist(), cols.tolist()))


def acp(grid: OccupancyGrid, positions, operator, r: float, universe: str = "known") -> CoverageReport:
    universe_cells = grid.universe_mask(universe)
    total = int(universe_cells.sum())
    if total == 0:
        raise MapValidationError(f"coverage universe {universe!r} is empty")
    if not r > 0:
        raise ValueError(f"coverage radius must be > 0, got {r}")
    xs, ys = grid.cell_centers()
    covered = np.zeros(grid.cells.shape, dtype=bool)
    for p in [operator, *positions]:
        covered |= np.hypot(xs - p[0], ys - p[1]) <= r
    covered &= universe_cells
    n = int(covered.sum())
    return CoverageReport(total, n, 100.0 * n / total, covered, universe)


def save_mask_image(report: CoverageReport, path) -> Path:
    """Grayscale raster of the mask: 255 covered, 0 not covered."""
    path = Path(path)
    Image.fromarray(np.where(report.mask, 255, 0).astype(np.uint8), mode="L").save(path)
    return path
