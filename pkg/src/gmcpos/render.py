"""Raster figures of a placement: map, roadmap, coverage disks, uncovered cells.

Colors follow the usual convention for these plots: green circles for
robots, a red square for the operator, blue disks for robot coverage, a
yellow disk for the operator, red tint on universe cells nobody covers.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from gmcpos.mapio import OccupancyGrid

DEFAULT_SCALE = 8

_MAP_COLORS = np.array([[255, 255, 255], [30, 30, 30], [205, 205, 205]], dtype=np.uint8)
UNCOVERED = (235, 70, 70)
ROBOT_DISK = (40, 90, 255, 45)
OPERATOR_DISK = (255, 215, 0, 70)
EDGE = (150, 150, 150, 255)
ROBOT = (20, 170, 60, 255)
OPERATOR = (220, 20, 20, 255)


def _to_px(grid: OccupancyGrid, p, scale: int) -> tuple[float, float]:
    col = (p[0] - grid.origin.x) / grid.resolution
    from_top = grid.height_cells - (p[1] - grid.origin.y) / grid.resolution
    return col * scale, from_top * scale


def render(grid: OccupancyGrid, graph, positions, operator, r: float, mask=None, out=None, scale: int = DEFAULT_SCALE, universe: str = "known") -> Image.Image:
    """Draw the scene; returns the image and writes it to ``out`` when given.

    The image is exactly ``width_cells * scale`` by ``height_cells * scale``.
    """
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    rgb = _MAP_COLORS[grid.cells].copy()
    if mask is not None:
        uncovered = grid.universe_mask(universe) & ~np.asarray(mask, dtype=bool)
        rgb[uncovered] = UNCOVERED
    base = Image.fromarray(rgb, mode="RGB").resize(
        (grid.width_cells * scale, grid.height_cells * scale), Image.NEAREST
    ).convert("RGBA")

    overlay = Image.new("RGBA", base.size, (0, 0, 0, 0))
    draw = ImageDraw.Draw(overlay)
    radius_px = r / grid.resolution * scale
    for p, fill in [*((p, ROBOT_DISK) for p in positions), (operator, OPERATOR_DISK)]:
        x, y = _to_px(grid, p, scale)
        draw.ellipse([x - radius_px, y - radius_px, x + radius_px, y + radius_px], fill=fill)
    base = Image.alpha_composite(base, overlay)

    draw = ImageDraw.Draw(base)
    if graph is not None:
        for u, v, _ in graph.edges():
            draw.line([_to_px(grid, graph.nodes[u], scale), _to_px(grid, graph.nodes[v], scale)], fill=EDGE, width=max(1, scale // 4))
    marker = max(3, scale)
    for p in positions:
        x, y = _to_px(grid, p, scale)
        draw.ellipse([x - marker, y - marker, x + marker, y + marker], fill=ROBOT, outline=(0, 0, 0, 255))
    x, y = _to_px(grid, operator, scale)
    draw.rectangle([x - marker, y - marker, x + marker, y + marker], fill=OPERATOR, outline=(0, 0, 0, 255))

    image = base.convert("RGB")
    if out is not None:
        image.save(Path(out))
    return image
