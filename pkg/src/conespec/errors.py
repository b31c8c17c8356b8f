"""Exception taxonomy.

Exit-code mapping used by the CLI: ConfigError -> 1, HypothesisError -> 2,
ConvergenceError/SolverError -> 3.
"""


class ConeSpecError(Exception):
    """Base class for all conespec errors."""


class DomainError(ConeSpecError, ValueError):
    """Input outside the mathematical domain of an operation."""


class RangeError(ConeSpecError, OverflowError):
    """Result not representable in double precision (over/underflow)."""


class LogLeadingOrderError(DomainError):
    """Hankel small-argument leading term requested at order zero, where
    the leading behaviour is logarithmic rather than a pure power."""


class DiagonalError(DomainError):
    """Resolvent kernel requested at coincident points."""


class HypothesisError(ConeSpecError):
    """Positivity hypothesis on the cross-section operator fails.

    Carries ``nu0_sq``, the offending lowest eigenvalue.
    """

    def __init__(self, message, nu0_sq=None):
        super().__init__(message)
        self.nu0_sq = nu0_sq


class ZeroResonanceError(HypothesisError):
    """A zero-energy resonance was detected (the decaying solution is
    pure at infinity), violating the no-resonance hypothesis."""


class ConvergenceError(ConeSpecError):
    """An iterative computation failed to reach the requested tolerance.

    Carries ``achieved``, the best bound obtained.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SolverError(ConvergenceError):
    """ODE or eigenvalue iteration breakdown (step collapse, no QL
    convergence)."""


class ModelError(ConeSpecError, ValueError):
    """A model ingredient violates its stated requirements (e.g. the
    radial perturbation decays too slowly)."""


class ConfigError(ConeSpecError, ValueError):
    """Invalid run configuration or unusable numerical parameters."""


class FitQualityWarning(UserWarning):
    """Decay-fit window shows oscillatory contamination."""
