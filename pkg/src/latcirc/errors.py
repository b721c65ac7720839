"""Exception types shared across the package."""


class LatcircError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDispersion(LatcircError):
    """|c(p)| >= 1, so the one-step phase has no real solution (m = 0 edge)."""


class QuadratureNotConverged(LatcircError):
    """Doubling the quadrature nodes moved the result more than the tolerance."""


class LatticeTooSmall(LatcircError):
    """Lattice cannot hold the requested causal cone without wrap-around."""


class DimensionCap(LatcircError):
    """Requested Hilbert-space dimension exceeds the configured cap."""


class BruteForceCap(LatcircError):
    """Requested brute-force sum exceeds the configured term cap."""


class OddLattice(LatcircError):
    """Chessboard plaquette coloring needs even lattice extents."""


class IllConditionedFit(LatcircError):
    """Log-slope fit requested on too narrow a range of lattice spacings."""


class UnknownDiagram(LatcircError):
    """Diagram kind not in the closed catalog."""


class DomainError(LatcircError):
    """Argument outside a special function's domain."""


class ObservableFailure(LatcircError):
    """An observable could not be evaluated at the given parameter point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class Diverged(LatcircError):
    """Gradient descent cost increased for too many consecutive steps."""


class NonFinite(LatcircError):
    """A numerical evaluation produced NaN or infinity."""
