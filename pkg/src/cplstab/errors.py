"""Exception and warning types shared across the package."""


class ParameterDomainError(ValueError):
    """An input lies outside the physical or numerical domain of a routine."""


class SchemeError(ValueError):
    """A scheme description is internally inconsistent or unsupported."""


class SingularMatrixError(ArithmeticError):
    """A linear solve hit a pivot too small to trust."""


class SingularityError(ValueError):
    """A dispersion relation was evaluated at a removable singularity (A = 0 or 1)."""


class SpectrumError(RuntimeError):
    """Eigenvalue computation failed or did not meet its residual target.

    The partially computed spectrum, when available, is attached as the
    `spectrum` attribute.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class MarginalModeWarning(UserWarning):
    """Both spatial roots lie on the unit circle; branch selection is ambiguous."""


class KappaPoleWarning(UserWarning):
    """A closed-form spatial root passed through a pole (e.g. beta = d)."""


class UnconfirmedRootWarning(UserWarning):
    """A scan candidate did not converge under Newton polishing and was dropped."""


class DecayFloorWarning(UserWarning):
    """Trajectory norms underflowed to zero before the requested window ended."""


class SolveResidualWarning(UserWarning):
    """A linear-solve residual stayed above target after iterative refinement."""
