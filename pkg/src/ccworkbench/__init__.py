"""Central configurations in barycentric (Dziobek) coordinates: solver and checks."""

from .dziobek import CCSolution, Exponent, Tolerances, find_roots, solve_normalized, validate
from .errors import (
    CoincidentPoints,
    DimensionMismatch,
    DomainViolation,
    HypothesisViolation,
    NoConvergence,
    NotRealizable,
    SpuriousRoot,
    WrongRank,
)
from .geometry import Configuration, MassVector, SquaredDistanceMatrix

__all__ = [
    "CCSolution",
    "Configuration",
    "CoincidentPoints",
    "DimensionMismatch",
    "DomainViolation",
    "Exponent",
    "HypothesisViolation",
    "MassVector",
    "NoConvergence",
    "NotRealizable",
    "SpuriousRoot",
    "SquaredDistanceMatrix",
    "Tolerances",
    "WrongRank",
    "find_roots",
    "solve_normalized",
    "validate",
]
