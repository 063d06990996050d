"""Exception hierarchy shared across the library.

The CLI maps these onto process exit codes, so new error conditions should
subclass one of the categories below rather than raising bare ValueErrors.
"""


class DirichletPrivacyError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(DirichletPrivacyError, ValueError):
    """Vectors of incompatible length were combined."""


class InvalidSimplexError(DirichletPrivacyError, ValueError):
    """Entries are negative or do not sum to one within tolerance."""


class InfeasibleDomainError(DirichletPrivacyError, ValueError):
    """The restricted domain is empty for the given (W, eta, eta_bar)."""


class DomainMembershipError(DirichletPrivacyError, ValueError):
    """A vector required to lie in the restricted domain does not."""


class AdjacencyError(DirichletPrivacyError, ValueError):
    """Inputs are not adjacent in the required sense."""


class DomainTooTightError(DirichletPrivacyError, ValueError):
    """Privacy-level formula is undefined because eta/eta_bar/b leave no room."""


class CalibrationInfeasibleError(DirichletPrivacyError, ValueError):
    """No partition parameter satisfies the requested failure probability."""


class ApproximationInvalidError(DirichletPrivacyError, ValueError):
    """The beta-function envelope does not apply to these arguments."""


class UnboundedDensityError(DirichletPrivacyError, ValueError):
    """The density has no finite value at the requested boundary point."""


class NumericalError(DirichletPrivacyError, ArithmeticError):
    """An iterative numerical routine failed to converge."""
