"""Exception types shared across the package."""


class ParaxialDomainError(ValueError):
    """Transverse momentum outside the admissible band (|p_perp| >= n0, p_z <= 0)."""


class MediumDomainError(ValueError):
    """Query point outside the declared domain of a medium profile."""


class WeakMediumError(ValueError):
    """Perturbation too strong for the weakly inhomogeneous regime."""


class ParaxialityLost(RuntimeError):
    """A traced ray turned sideways (p_z <= 0) or the step size collapsed."""

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class NumericalBreakdown(FloatingPointError):
    """Non-finite values appeared in a propagated field."""

    def __init__(self, message, last_good_z=None):
        super().__init__(message)
        self.last_good_z = last_good_z
