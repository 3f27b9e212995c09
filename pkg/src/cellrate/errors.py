"""Exception types raised by cellrate."""


class CellrateError(Exception):
    """Base class for all library errors."""


class NonConvergence(CellrateError, ArithmeticError):
    """Quadrature or iteration ran out of budget before meeting tolerance."""


class NoSignChange(CellrateError, ValueError):
    """Root bracket does not straddle a sign change."""


class DegenerateStep(CellrateError, ValueError):
    """Finite-difference stencil leaves the function's domain."""


class BelowReferenceDistance(CellrateError, ValueError):
    """Pathloss evaluated closer than the reference distance."""


class PoleCrossing(CellrateError, ValueError):
    """MGF argument at or beyond the first pole."""


class NearDegenerateMeans(CellrateError, ValueError):
    """Two interference means coincide within tolerance."""


class ScenarioError(CellrateError, ValueError):
    """Invalid scenario file or scenario invariant violation."""
