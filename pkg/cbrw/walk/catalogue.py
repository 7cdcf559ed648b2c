"""Jump models of the worked examples"""

from typing import Callable, Dict

from cbrw.walk.laws import AxisComponent, AxisMixture, FiniteSupport, ProductMarginals
from cbrw.walk.marginals import DisplacedPoisson, Rademacher
from cbrw.walk.model import JumpModel, validate_model


def example_1(q: float = 1.0, p_right: float = 0.5) -> JumpModel:
    """Nearest-neighbour walk on Z, +1 with probability p_right"""
    law = FiniteSupport([[1], [-1]], [p_right, 1.0 - p_right])
    return validate_model(1, q, law)


def example_2a(q: float = 2.0) -> JumpModel:
    """Simple symmetric walk on Z^2"""
    law = AxisMixture(
        2,
        [AxisComponent(0, 0.5, Rademacher()), AxisComponent(1, 0.5, Rademacher())],
    )
    return validate_model(2, q, law)


def example_2b(q: float = 3.0) -> JumpModel:
    """Walk on Z^2 shifting to (2,0), (-1,0), (0,1), (0,-1) w.p. 1/2, 1/6, 1/6, 1/6"""
    law = FiniteSupport(
        [[2, 0], [-1, 0], [0, 1], [0, -1]],
        [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
    )
    return validate_model(2, q, law)


def example_2c(q: float = 8.0, sigma_1: float = 2.0, sigma_2: float = 1.0) -> JumpModel:
    """Displaced Poisson horizontal jumps, nearest-neighbour vertical jumps"""
    law = AxisMixture(
        2,
        [
            AxisComponent(0, 0.5, DisplacedPoisson(sigma_1, sigma_2, 0.5, 0.5)),
            AxisComponent(1, 0.5, Rademacher()),
        ],
    )
    return validate_model(2, q, law)


def example_3(q: float = 1.0, sigma_1: float = 0.2, sigma_2: float = 0.5) -> JumpModel:
    """Independent coordinates on Z^3"""
    law = ProductMarginals(
        [
            DisplacedPoisson(sigma_1, sigma_1, 0.5, 0.5),
            DisplacedPoisson(sigma_2, sigma_2, 0.5, 0.5),
            Rademacher(),
        ]
    )
    return validate_model(3, q, law)


def nearest_neighbour(dimension: int, q: float = 1.0) -> JumpModel:
    """Simple symmetric walk on Z^d"""
    weight = 1.0 / dimension
    law = AxisMixture(
        dimension, [AxisComponent(axis, weight, Rademacher()) for axis in range(dimension)]
    )
    return validate_model(dimension, q, law)


# Level nu used for the published front of each example
FRONT_LEVELS: Dict[str, float] = {
    "example_2a": 2.0,
    "example_2b": 1.0,
    "example_2c": 4.0,
    "example_3": 0.5,
}

CATALOGUE: Dict[str, Callable[..., JumpModel]] = {
    "example_1": example_1,
    "example_2a": example_2a,
    "example_2b": example_2b,
    "example_2c": example_2c,
    "example_3": example_3,
}
