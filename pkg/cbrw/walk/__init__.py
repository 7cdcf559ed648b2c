"""Space-homogeneous random walks on the integer lattice"""

from cbrw.walk.base import JumpLaw, Marginal
from cbrw.walk.laws import AxisComponent, AxisMixture, FiniteSupport, ProductMarginals
from cbrw.walk.marginals import DisplacedPoisson, FiniteList, Rademacher
from cbrw.walk.model import JumpModel, validate_model

__all__ = [
    "AxisComponent",
    "AxisMixture",
    "DisplacedPoisson",
    "FiniteList",
    "FiniteSupport",
    "JumpLaw",
    "JumpModel",
    "Marginal",
    "ProductMarginals",
    "Rademacher",
    "validate_model",
]
