"""Exception types raised across the package."""


class CCError(Exception):
    """Base class for all workbench errors."""


class CoincidentPoints(CCError):
    pass


class DimensionMismatch(CCError):
    pass


class NotRealizable(CCError):
    """A squared-distance matrix has no Euclidean embedding in the requested dimension.

    Attributes
    ----------
    min_eigenvalue : float
        Most negative eigenvalue of the double-centered Gram matrix (0 if none).
    excess_rank : int
        Number of significant eigenvalues beyond the target dimension.
    """

    def __init__(self, message, min_eigenvalue=0.0, excess_rank=0):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.excess_rank = excess_rank


class WrongRank(CCError):
    pass


class DomainViolation(CCError):
    pass


class HypothesisViolation(CCError):
    pass


class NoConvergence(CCError):
    def __init__(self, message, best_residual=float("inf")):
        super().__init__(message)
        self.best_residual = best_residual


class SpuriousRoot(CCError):
    """Every root of the t-system that was found failed post-validation."""

    def __init__(self, message, reports=()):
        super().__init__(message)
        self.reports = list(reports)
