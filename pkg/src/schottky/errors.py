"""Exception and warning types shared across the library."""


class SchottkyError(Exception):
    """Base class for mathematical failures raised by this library."""


class ValidationError(SchottkyError):
    """A Schottky scheme violates a structural or geometric requirement."""


class NotHyperbolicError(SchottkyError):
    """An operation requiring a hyperbolic element received |tr| <= 2."""


class PoleError(SchottkyError):
    """Evaluation at (or too close to) the pole of a Moebius map."""


class InfeasibleParametersError(SchottkyError):
    """Scheme-builder parameters do not admit disjoint disk closures."""


class ContractionError(SchottkyError):
    """Disk-level contraction factor is >= 1; refine before proceeding."""


class RefinementOverflowError(SchottkyError):
    """A refined cover would exceed the configured disk-count cap."""


class NonConvergenceError(SchottkyError):
    """An iterative numerical procedure failed to reach its tolerance."""


class IntransitiveActionError(SchottkyError):
    """A coset action is not transitive (the cover would be disconnected)."""


class NonRegularActionError(SchottkyError):
    """An operation restricted to regular covers received a non-regular one."""


class NonAbelianError(SchottkyError):
    """Character construction is implemented for abelian deck groups only."""


class NonIntegralError(SchottkyError):
    """Congruence machinery requires generators with exact integer entries."""


class BudgetExceededError(SchottkyError):
    """An enumeration exceeded its configured size or depth budget."""


class BoundaryZeroError(SchottkyError):
    """The determinant vanishes on a counting contour even after nudging."""


class PhaseTrackingError(SchottkyError):
    """Boundary phase accumulation did not land on an integer winding."""


class PrecisionLossWarning(UserWarning):
    """Estimated conditioning exceeds the double-precision budget."""


class DivergenceWarning(UserWarning):
    """An Euler product was requested outside its convergence half-plane."""
