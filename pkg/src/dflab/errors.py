"""Exception hierarchy for dflab.

Exit-code mapping used by the CLI: configuration problems -> 1,
numerical failures -> 2, violated structural hypotheses -> 3.
"""


class DflabError(Exception):
    """Base class for all dflab errors."""


class ConfigError(DflabError):
    """Malformed configuration input."""


class DomainError(DflabError):
    """Evaluation requested outside a profile's domain of definition."""


class ConstraintViolation(DflabError):
    """A cutoff function failed one or more of its defining conditions.

    Carries ``failures``, a list of (condition_name, witness_x, value).
    """

    def __init__(self, failures):
        self.failures = list(failures)
        names = ", ".join(sorted({f[0] for f in self.failures}))
        super().__init__(f"cutoff conditions failed: {names}")


class NumericalError(DflabError):
    """Base class for failures of the numerical machinery."""


class OutsideCollar(NumericalError):
    """Point lies outside the trusted tubular neighborhood of the boundary."""


class ProjectionDiverged(NumericalError):
    """Closest-point Newton iteration failed to converge from every seed."""


class DegenerateGradient(NumericalError):
    """The defining-function gradient is numerically zero at a boundary point."""


class SingularTransport(NumericalError):
    """Hessian transport hit a focal point (collar too thick)."""


class NotTangent(NumericalError):
    """Supplied direction is not in the complex tangent space."""


class DegenerateNormal(NumericalError):
    """The w-component of the complex gradient is numerically zero."""


class NotAnnulus(NumericalError):
    """Operation requires an annulus-like weak component."""


class WindowTooWide(NumericalError):
    """No positive trigonometric weight exists: oscillation window >= pi."""


class NonPositive(NumericalError):
    """Internal guard: constructed weight failed its positivity grid check."""


class NoBracket(NumericalError):
    """Bisection could not start: smallest exponent already infeasible."""


class HypothesisViolation(DflabError):
    """Structural hypothesis of a theorem-level operation does not hold."""


class IrregularConfiguration(HypothesisViolation):
    """Weak set fails the regularity condition at the sampled resolution."""


class IrregularWeakSet(HypothesisViolation):
    """Lower-bound computation received a non-regular classification."""
