"""Exception types shared across the package."""


class MelonfieldError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MelonfieldError, ValueError):
    """Input outside the documented domain of an operation."""


class BranchCutError(DomainError):
    """Resolvent requested on its cut without choosing a side."""


class PoleError(DomainError):
    """Evaluation exactly at a pole."""


class CollisionError(MelonfieldError):
    """Two eigenvalues of the same color are too close to separate."""

    def __init__(self, color: int, i: int, j: int, distance: float):
        self.color = color
        self.pair = (i, j)
        self.distance = distance
        super().__init__(
            f"eigenvalue collision in color {color}: indices {i} and {j} "
            f"at distance {distance:.3e}"
        )


class SingularDenominatorError(MelonfieldError):
    """Interaction denominator too close to zero (pole crossing)."""


class DivergenceError(MelonfieldError):
    """Newton iteration failed to reduce the residual."""

    def __init__(self, message: str, residual_norm: float):
        self.residual_norm = residual_norm
        super().__init__(message)


class QuadratureError(MelonfieldError):
    """Adaptive quadrature stalled before reaching the requested tolerance."""


class SignProblemError(MelonfieldError):
    """Monte Carlo phase average too small for a reliable estimate."""

    def __init__(self, message: str, phase_mean: float, estimate=None):
        self.phase_mean = phase_mean
        self.estimate = estimate
        super().__init__(message)


class InsufficientMomentsError(MelonfieldError, ValueError):
    """A moment table is shorter than the requested transform order."""
