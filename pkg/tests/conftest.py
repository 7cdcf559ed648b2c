"""Shared pytest fixtures for all tests"""

import copy
import json
from pathlib import Path
from typing import Any, Dict

import pytest

from cbrw.config import validate_config
from cbrw.malthus import Catalyst, CatalyticSystem, Deterministic, SolverSettings
from cbrw.walk.catalogue import (
    example_1,
    example_2a,
    example_2b,
    example_2c,
    example_3,
    nearest_neighbour,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


# ============================================================================
# Jump models
# ============================================================================

@pytest.fixture
def line_model():
    """Simple symmetric walk on Z with q = 1"""
    return example_1()


@pytest.fixture
def square_model():
    """Simple symmetric walk on Z^2 with q = 2"""
    return example_2a()


@pytest.fixture
def drift_model():
    """Example 2b walk: drift to the right, q = 3"""
    return example_2b()


@pytest.fixture
def poisson_model():
    """Example 2c walk: displaced Poisson horizontal jumps, q = 8"""
    return example_2c()


@pytest.fixture
def product_model():
    """Example 3 walk on Z^3 with independent coordinates"""
    return example_3()


@pytest.fixture
def cubic_model():
    """Simple symmetric walk on Z^3 with q = 1"""
    return nearest_neighbour(3, 1.0)


# ============================================================================
# Catalytic systems
# ============================================================================

@pytest.fixture
def line_system(line_model):
    """One catalyst at the origin of Z, alpha = 0.5, two offspring"""
    return CatalyticSystem(
        model=line_model,
        catalysts=(Catalyst((0,), 0.5, Deterministic(2)),),
        start=(0,),
    )


@pytest.fixture
def pair_system(line_model):
    """Catalysts at 0 and 2 on Z"""
    return CatalyticSystem(
        model=line_model,
        catalysts=(
            Catalyst((0,), 0.5, Deterministic(2)),
            Catalyst((2,), 0.5, Deterministic(2)),
        ),
        start=(0,),
    )


@pytest.fixture
def solver_settings():
    return SolverSettings()


# ============================================================================
# Configuration
# ============================================================================

@pytest.fixture
def config_data() -> Dict[str, Any]:
    """Raw dictionary of the bundled d = 1 config"""
    return json.loads((CONFIG_DIR / "ex1_d1.json").read_text(encoding="utf-8"))


@pytest.fixture
def small_config_data(config_data) -> Dict[str, Any]:
    """d = 1 config with a short, cheap simulation section"""
    data = copy.deepcopy(config_data)
    data["simulate"] = {
        "horizon": 3.0,
        "checkpoint_step": 1.0,
        "runs": 5,
        "seed": 1,
        "epsilon_fracs": [0.5],
    }
    return data


@pytest.fixture
def small_config(small_config_data):
    return validate_config(small_config_data)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a temporary JSON file and return the path"""

    def _write(data: Dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
