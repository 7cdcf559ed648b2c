"""
Unit tests for run configuration parsing
"""

import copy
import math
from pathlib import Path

import pytest

from cbrw.config import parse_config, validate_config
from cbrw.errors import ConfigError, ParseError, SchemaError
from cbrw.malthus import Deterministic

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


@pytest.mark.unit
class TestParseConfig:
    """Test parse_config functionality"""

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_bundled_configs(self, path):
        """Test that every bundled config validates and builds"""
        config = parse_config(path)
        system = config.build_system()
        assert system.model.dimension == config.model.dimension
        assert system.size == len(config.catalysts)

    def test_line_config(self, config_data):
        """Test the values of the d = 1 config"""
        config = validate_config(config_data)
        assert config.model.q == 1.0
        assert config.simulate.window() == (8.0, 16.0)
        assert config.verify.attainment_epsilon_frac == 0.5
        assert config.verify.containment_epsilon_frac == 0.15
        catalyst = config.build_system().catalysts[0]
        assert catalyst.offspring == Deterministic(2)

    def test_acceptance_config(self):
        """Test that the full-scale d = 1 config carries the acceptance thresholds"""
        config = parse_config(CONFIG_DIR / "ex1_d1_acceptance.json")
        assert config.simulate.horizon == 40.0
        assert config.simulate.runs == 500
        assert config.simulate.window() == (20.0, 40.0)
        assert config.simulate.snapshot_list() == [40.0]
        assert config.verify.containment_epsilon_frac == 0.15
        assert config.verify.attainment_epsilon_frac == 0.15
        assert config.verify.outside_limit == 0.01
        assert config.verify.attainment_rate == 0.95
        assert config.verify.growth_tolerance == 0.10
        assert config.verify.checks == ["C9", "C10"]
        assert config.verify.options == {"C10": {"strict": True}}
        assert config.simulate.caps().max_population > 2 * math.exp((math.sqrt(2.0) - 1.0) * 40)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is a config error"""
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test that syntax errors report line and column"""
        path = tmp_path / "broken.json"
        path.write_text('{\n  "model": {,\n}', encoding="utf-8")
        with pytest.raises(ParseError) as excinfo:
            parse_config(path)
        assert excinfo.value.line == 2
        assert excinfo.value.column > 0

    def test_non_object(self, write_config):
        """Test that the top level must be an object"""
        path = write_config([1, 2, 3])
        with pytest.raises(SchemaError) as excinfo:
            parse_config(path)
        assert excinfo.value.key == "<root>"


@pytest.mark.unit
class TestValidateConfig:
    """Test schema validation"""

    def test_alpha_one_rejected(self, config_data):
        """Test that alpha must lie in [0, 1)"""
        data = copy.deepcopy(config_data)
        data["catalysts"][0]["alpha"] = 1.0
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "catalysts.0.alpha"

    def test_unknown_key_rejected(self, config_data):
        """Test that unknown keys are refused"""
        data = copy.deepcopy(config_data)
        data["simulate"]["horizn"] = 3.0
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "simulate.horizn"

    def test_nonpositive_rate_rejected(self, config_data):
        """Test that q must be positive"""
        data = copy.deepcopy(config_data)
        data["model"]["q"] = 0.0
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "model.q"

    def test_start_dimension(self, config_data):
        """Test that the start point must live in Z^d"""
        data = copy.deepcopy(config_data)
        data["start"] = [0, 0]
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "start"

    def test_duplicate_catalysts(self, config_data):
        """Test that catalyst positions must be distinct"""
        data = copy.deepcopy(config_data)
        data["catalysts"].append(copy.deepcopy(data["catalysts"][0]))
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "catalysts.1.position"

    def test_too_many_catalysts(self, config_data):
        """Test the catalyst count limit"""
        data = copy.deepcopy(config_data)
        data["catalysts"] = [
            {"position": [i], "alpha": 0.5, "offspring": {"kind": "deterministic", "k": 2}}
            for i in range(3)
        ]
        data["solver"] = {"max_catalysts": 2}
        with pytest.raises(SchemaError) as excinfo:
            validate_config(data)
        assert excinfo.value.key == "catalysts"

    def test_unknown_offspring_kind(self, config_data):
        """Test that offspring kinds are a closed set"""
        data = copy.deepcopy(config_data)
        data["catalysts"][0]["offspring"] = {"kind": "negative_binomial", "r": 2}
        with pytest.raises(SchemaError):
            validate_config(data)

    def test_level_tol_factor(self, config_data):
        """Test that the front tolerance is configured as a relative factor"""
        data = copy.deepcopy(config_data)
        data["front"] = {"level_tol_factor": 1e-8}
        config = validate_config(data)
        assert config.front.level_tol_factor == 1e-8
        data["front"] = {"level_tol": 1e-8}
        with pytest.raises(SchemaError):
            validate_config(data)

    def test_defaults(self, config_data):
        """Test section defaults"""
        data = copy.deepcopy(config_data)
        del data["simulate"]
        del data["verify"]
        config = validate_config(data)
        assert config.simulate.horizon == 16.0
        assert config.simulate.window() == (8.0, 16.0)
        assert config.verify.z_limit == 3.0
        assert config.front.resolution_for(2) == 720
        assert config.front.resolution_for(3) == 64
        assert config.solver.settings().lambda_min == 1e-8

    def test_checkpoint_times(self, small_config):
        """Test the checkpoint grid"""
        assert small_config.simulate.checkpoint_times() == [0.0, 1.0, 2.0, 3.0]
        assert small_config.simulate.snapshot_list() == [3.0]

    def test_dump_round_trip(self, small_config):
        """Test that a dumped config validates to the same config"""
        assert validate_config(small_config.dump()) == small_config
