class GmcPosError(Exception):
    """Base class for all errors raised by this package."""


class MapParseError(GmcPosError):
    """A map file could not be read or decoded."""


class MapValidationError(GmcPosError):
    """A map decoded fine but violates a grid invariant."""


class NoSkeletonError(GmcPosError):
    """Distillation left no skeleton cells."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class GraphError(GmcPosError):
    """A roadmap graph violates its structural invariants."""


class ScenarioError(GmcPosError):
    """Scenario inputs are out of range (e.g. operator outside the map)."""
