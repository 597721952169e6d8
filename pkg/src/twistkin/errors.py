"""Exception hierarchy.

Validation problems (bad input, violated physical invariants) derive from
:class:`ValidationError`; everything that goes wrong while computing derives
from :class:`NumericalError`.  The CLI maps the two families to exit codes
2 and 3.
"""


class TwistKinError(Exception):
    """Base class for all package errors."""


class ValidationError(TwistKinError, ValueError):
    pass


class NumericalError(TwistKinError, ArithmeticError):
    pass


class SchemaError(ValidationError):
    """Malformed configuration: unknown key, wrong type, missing field."""

    def __init__(self, key, line, reason):
        self.key = key
        self.line = line
        self.reason = reason
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}{where}: {reason}")


class PhysicsError(ValidationError):
    """A physical invariant of a domain type is violated."""

    def __init__(self, invariant, detail=""):
        self.invariant = invariant
        msg = f"violated invariant: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class FixedEnergyViolation(ValidationError):
    """Lineshape inputs taken at different photon settings."""


class OutsideAnnulus(NumericalError):
    """(kappa1, kappa2, k_perp) violate the triangle inequalities."""


class DegenerateBoundary(NumericalError):
    """Triangle collapsed onto the annulus boundary; 1/area diverges."""


class NoSolution(NumericalError):
    pass


class EnergyMismatch(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class RootFailure(NumericalError):
    pass


class Undersampled(NumericalError):
    pass


class IllPosed(NumericalError):
    pass


class NoFringe(NumericalError):
    pass


class AlwaysVisible(NumericalError):
    pass


class NeverVisible(NumericalError):
    pass


class SamplingInefficiency(RuntimeWarning):
    """Rejection sampler acceptance dropped below 1e-4."""


class SignConventionWarning(UserWarning):
    """Photon longitudinal momenta do not follow k1z > 0 > k2z."""
