"""Exception types shared across the toolkit."""


class GeoConvexError(Exception):
    """Base class for all toolkit errors."""


class OutOfDomain(GeoConvexError):
    """A coordinate point violates the chart domain predicate."""

    def __init__(self, point, message="point outside chart domain"):
        super().__init__(f"{message}: {tuple(float(c) for c in point)}")
        self.point = point


class DegenerateMetric(GeoConvexError):
    """Metric determinant below the degeneracy cutoff at a point."""


class NotRegular(GeoConvexError):
    """The defining function has (numerically) vanishing differential."""


class DegeneratePoint(GeoConvexError):
    """g(grad phi, grad phi) ~ 0: the second fundamental form is undefined here."""


class NotTangent(GeoConvexError):
    """Vector fails the tangency test d phi(v) = 0 within tolerance."""


class NotOnSurface(GeoConvexError):
    """Point is outside the |phi| surface band."""


class LeftDomain(GeoConvexError):
    """A geodesic exited the chart domain; carries the last valid state."""

    def __init__(self, last_state, message="geodesic left the chart domain"):
        super().__init__(message)
        self.last_state = last_state


class StepFailure(GeoConvexError):
    """Adaptive step size underflowed."""


class BVPNotFound(GeoConvexError):
    """Two-point geodesic problem did not converge; carries diagnostics."""

    def __init__(self, residual, iterations, message="geodesic BVP did not converge"):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class NotCausal(GeoConvexError):
    """Curve fails the causal (or future-pointing) test; carries the worst grid point."""

    def __init__(self, index, value, message="curve is not causal/future-pointing"):
        super().__init__(f"{message} at grid index {index} (value={value:.3e})")
        self.index = index
        self.value = value


class SideViolation(GeoConvexError):
    """Trajectory leaves the closure of the candidate convex side."""

    def __init__(self, s, phi_value, message="trajectory leaves the candidate side"):
        super().__init__(f"{message}: phi = {phi_value:.3e} at s = {s:.6g}")
        self.s = s
        self.phi_value = phi_value


class NoSurfacePoints(GeoConvexError):
    """Surface-point sampling failed everywhere in the requested region."""


class UnknownId(GeoConvexError):
    """Catalog id not found."""


class ConfigError(GeoConvexError):
    """Run configuration failed to parse or validate."""


class ExpressionError(GeoConvexError):
    """Expression string uses names or syntax outside the allowed subset."""
