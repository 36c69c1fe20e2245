"""Exception hierarchy shared by all tracelab modules."""


class TracelabError(Exception):
    """Base class for all tracelab errors."""


class SingularGradient(TracelabError):
    """Invariant gradient too small to define a projection or frame."""


class NoConvergence(TracelabError):
    """An iterative solver exhausted its iteration budget."""


class SingularJacobian(TracelabError):
    """Newton matrix condition number beyond the trust limit."""


class EmptyComponent(TracelabError):
    """Requested the compact surface component where none exists (V < -1)."""


class EscapedDomain(TracelabError):
    """An orbit iterate left the guard box [-10, 10]^3."""


class PoleAtHalf(TracelabError):
    """Period-two curve evaluated at its pole x = 1/2."""


class AmbiguousNeutral(TracelabError):
    """Two monodromy eigenvalues near 1 both align with the gradient."""


class NotHyperbolic(TracelabError):
    """Manifold growth requested for a non-hyperbolic orbit."""


class SingularityApproach(TracelabError):
    """A manifold arc entered the guard ball of a conic singularity."""


class PoorFit(TracelabError):
    """Quadratic fit residual exceeded tolerance even after window shrink."""


class BranchLost(TracelabError):
    """Continuation step floor reached without Newton convergence."""


class NoGaps(TracelabError):
    """Thickness requested for a presentation with no gaps."""


class DegenerateHull(TracelabError):
    """Sample span too small to define a Cantor presentation."""


class InsufficientScales(TracelabError):
    """Box-counting needs at least 4 scales."""


class EverythingDies(TracelabError):
    """No subinterval survives the avoidance construction."""


class NearSingularSeed(TracelabError):
    """Torus seed maps too close to a conic singularity."""
