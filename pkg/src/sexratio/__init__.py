"""Stopping rules for families of fair coin flips.

Simulation engines, exact distributions, limit-law checks, the square-root
tail exponent and the large deviations rate of the girls total.
"""
__version__ = "0.1.0"

from .errors import (ContractError, DomainError, IntegrityError, ParameterError, QualityError,
                     ResourceError, SexRatioError, SolverError)
from .rng import RngStream
from .strategies import (ChildrenBoundary, Doubling, Finiteness, GirlsBoundary, PBoys, PBoysMore,
                         SqrtBoundary, StrategySpec, finiteness_class, parse_strategy, should_stop)
from .walk import FamilyBatch, FamilyOutcome, simulate_batch, simulate_family

__all__ = [
    "ChildrenBoundary", "ContractError", "DomainError", "Doubling", "FamilyBatch", "FamilyOutcome",
    "Finiteness", "GirlsBoundary", "IntegrityError", "PBoys", "PBoysMore", "ParameterError",
    "QualityError", "ResourceError", "RngStream", "SexRatioError", "SolverError", "SqrtBoundary",
    "StrategySpec", "finiteness_class", "parse_strategy", "should_stop", "simulate_batch",
    "simulate_family",
]
