"""Exception hierarchy shared by every module of the package."""


class DpdgError(Exception):
    """Base class for numerical and input errors raised by dpdgauss."""


class DomainError(DpdgError, ValueError):
    """Parameter vector lies outside the model's open domain box."""


class NotSPD(DpdgError, ArithmeticError):
    """Covariance matrix failed symmetric positive-definite factorization."""


class InvalidTau(DpdgError, ValueError):
    """Tuning parameter outside the range an operation accepts."""


class SingularMatrix(DpdgError, ArithmeticError):
    """A matrix that must be inverted is singular.

    The ``factor`` attribute names the offending matrix (``"J"``, ``"K"``,
    ``"G^T J^-1 G"``...).
    """

    def __init__(self, factor, detail=""):
        self.factor = factor
        msg = f"singular matrix: {factor}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class NoConvergence(DpdgError, ArithmeticError):
    """An iterative solver stopped without meeting its tolerance.

    The best iterate is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RankDeficientConstraint(DpdgError, ArithmeticError):
    """Constraint Jacobian lost full column rank."""


class InvalidConstraint(DpdgError, ValueError):
    """Constraint is malformed or unusable for the requested operation."""
