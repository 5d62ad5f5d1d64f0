"""Exception types shared across the package."""


class SectorHomogError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SectorHomogError):
    """Invalid configuration value or combination (bad mesh size, unknown key, ...)."""


class MeshResolutionError(SectorHomogError):
    """Mesh too coarse for the coefficient oscillation it is asked to resolve."""


class EmptyRegionError(SectorHomogError):
    """A shell or element set that must be non-empty is empty."""


class PointLocationError(SectorHomogError):
    """Point-location query outside the meshed domain."""


class AssemblyError(SectorHomogError):
    """Degenerate element or otherwise broken assembly input."""


class SolverError(SectorHomogError):
    """Iterative solver failure."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = [] if residual_history is None else list(residual_history)


class NonConvergenceError(SolverError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class NotSPDError(SolverError):
    """Negative curvature encountered: the system is not SPD on the free nodes."""


class GaugeError(SectorHomogError):
    """Cell-problem right-hand side violates the zero-mean gauge."""


class NotNormalizableError(SectorHomogError):
    """Homogenized matrix too anisotropic to be rescaled to the identity."""


class SingularityError(SectorHomogError):
    """Evaluation request at the corner tip where the quantity is singular."""


class CutoffError(SectorHomogError):
    """Extraction cutoff overlaps the forcing support."""


class RankError(SectorHomogError):
    """Singular Gram matrix in a least-squares projection."""


class FitError(SectorHomogError):
    """Log-log slope fit on unusable data (nonpositive values or too few points)."""


class UnsupportedAngleError(SectorHomogError):
    """Operation undefined at this sector angle (e.g. extension at a full slit)."""
