"""Acceptance check plugins"""

from cbrw.checks.plugins.determinism import DeterminismCheck
from cbrw.checks.plugins.front import (
    FrontConsistencyCheck,
    LineFrontCheck,
    SquareLatticeFrontCheck,
)
from cbrw.checks.plugins.monte_carlo import (
    ExponentialMomentCheck,
    FrontSpreadCheck,
    GrowthRateCheck,
    ManyToOneCheck,
)
from cbrw.checks.plugins.numerics import (
    CubicCriticalityCheck,
    GreenClosedFormCheck,
    MalthusClosedFormCheck,
    MonotonicityCheck,
)

# Registration order is report order
DEFAULT_CHECKS = [
    MalthusClosedFormCheck,
    GreenClosedFormCheck,
    CubicCriticalityCheck,
    SquareLatticeFrontCheck,
    FrontConsistencyCheck,
    LineFrontCheck,
    ManyToOneCheck,
    ExponentialMomentCheck,
    FrontSpreadCheck,
    GrowthRateCheck,
    MonotonicityCheck,
    DeterminismCheck,
]

__all__ = [
    "DEFAULT_CHECKS",
    "CubicCriticalityCheck",
    "DeterminismCheck",
    "ExponentialMomentCheck",
    "FrontConsistencyCheck",
    "FrontSpreadCheck",
    "GreenClosedFormCheck",
    "GrowthRateCheck",
    "LineFrontCheck",
    "MalthusClosedFormCheck",
    "ManyToOneCheck",
    "MonotonicityCheck",
    "SquareLatticeFrontCheck",
]
