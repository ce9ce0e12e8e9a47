"""Graph-based multi-robot coverage positioning."""

from gmcpos.errors import (
    GmcPosError,
    GraphError,
    MapParseError,
    MapValidationError,
    NoSkeletonError,
    ScenarioError,
)
from gmcpos.mapio import CellState, OccupancyGrid, WorldPoint, parse_map

__version__ = "0.1.0"

__all__ = [
    "CellState",
    "GmcPosError",
    "GraphError",
    "MapParseError",
    "MapValidationError",
    "NoSkeletonError",
    "OccupancyGrid",
    "ScenarioError",
    "WorldPoint",
    "parse_map",
]
