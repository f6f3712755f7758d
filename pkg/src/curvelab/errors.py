"""Exception hierarchy shared by every curvelab module."""


class CurvelabError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(CurvelabError, ValueError):
    """Bad parameters: jet order out of range, unknown surface, bad options."""


class ConstructionError(CurvelabError, ValueError):
    """A catalog surface or curve pair could not be built as requested."""


class NumericError(CurvelabError, ArithmeticError):
    """Base for failures that depend on the evaluation point."""


class SingularityError(NumericError):
    """Division by a jet whose constant term vanishes."""


class DomainError(NumericError):
    """A function was evaluated outside its real domain (e.g. sqrt of x <= 0)."""


class OutOfOrderError(NumericError):
    """A partial derivative beyond the carried jet order was requested."""


class RegularityError(NumericError):
    """x_u and x_v are (numerically) parallel at the requested point."""


class FlatPointError(NumericError):
    """Gauss curvature below ``k_min`` where the second form must be invertible."""


class SingularFormError(NumericError):
    """The selected fundamental form is not invertible at the point."""


class DegenerateRulingError(NumericError):
    """The ruled-surface invariant A = (sigma', tau, tau') vanishes."""


class SamplingError(NumericError):
    """Not enough admissible sample points could be found."""


class IllPosedFitError(NumericError):
    """The least-squares design matrix is too badly conditioned to trust."""
