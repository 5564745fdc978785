"""Tests for configuration loading, validation and complex parsing."""
import json

import pytest

from core.config_manager import (ConfigManager, create_example_config, format_complex,
                                 parse_complex)
from core.errors import ConfigError


class TestParseComplex:

    @pytest.mark.parametrize("text,expected", [
        ("4+1i", 4 + 1j),
        ("-2i", -2j),
        ("3", 3 + 0j),
        ("1e-3-2.5i", 0.001 - 2.5j),
        ("i", 1j),
        ("-i", -1j),
        (" 2 - 0.5i ", 2 - 0.5j),
        (7, 7 + 0j),
    ])
    def test_accepts(self, text, expected):
        assert parse_complex(text) == expected

    @pytest.mark.parametrize("text", ["abc", "4+1j", "inf", True, None, "1+nani"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_complex(text, "shift.eps[0]")

    def test_error_names_field(self):
        with pytest.raises(ConfigError) as info:
            parse_complex("x", "shift.mu[1]")
        assert info.value.field == "shift.mu[1]"
        assert "shift.mu[1]" in str(info.value)

    @pytest.mark.parametrize("value", [4 + 1j, -2j, 3.0, 0.1 - 1e-7j])
    def test_format_is_parseable(self, value):
        assert parse_complex(format_complex(value)) == value


def _write(tmp_path, text):
    path = tmp_path / "run.json"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoad:

    def test_defaults(self):
        config = ConfigManager()
        assert config.get_weight_spec().family == "legendre"
        assert config.get_node_count() == 128
        assert config.get_formula() == "ratio"
        assert config.get_suite() == "none"

    def test_merges_file(self, tmp_path):
        path = _write(tmp_path, json.dumps({"weight": {"family": "jacobi-like",
                                                       "params": [1.0, 0.5]},
                                            "shift": {"eps": ["2+0.5i"]}}))
        config = ConfigManager(path)
        spec = config.get_weight_spec()
        assert spec.family == "jacobi-like"
        assert config.get_node_count() == 128
        assert config.get_shift().eps == (2 + 0.5j,)

    def test_invalid_json_reports_line(self, tmp_path):
        path = _write(tmp_path, '{\n  "weight": {\n    "family": "legendre",\n  }\n}\n')
        with pytest.raises(ConfigError) as info:
            ConfigManager(path)
        assert info.value.line == 4
        assert str(info.value).startswith("line 4")

    def test_unknown_key(self, tmp_path):
        path = _write(tmp_path, '{\n  "weight": {\n    "famly": "legendre"\n  }\n}\n')
        with pytest.raises(ConfigError) as info:
            ConfigManager(path)
        assert info.value.field == "weight.famly"
        assert info.value.line == 3

    def test_unknown_section(self, tmp_path):
        path = _write(tmp_path, '{"plot": {}}')
        with pytest.raises(ConfigError):
            ConfigManager(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigManager(str(tmp_path / "absent.json"))


class TestValidation:

    def test_unknown_family(self):
        config = ConfigManager()
        config.apply_overrides({"weight.family": "foo"})
        with pytest.raises(ConfigError) as info:
            config.get_weight_spec()
        assert info.value.field == "weight.family"

    def test_bad_params(self):
        config = ConfigManager()
        config.apply_overrides({"weight.family": "jacobi-like", "weight.params": [-2.0, 0.0]})
        with pytest.raises(ConfigError) as info:
            config.get_weight_spec()
        assert info.value.field == "weight.params"

    def test_overrides_skip_none(self):
        config = ConfigManager()
        config.apply_overrides({"average.N": 3, "average.M": None})
        assert config.get_N() == 3
        assert config.get("average", "M") is None

    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            ConfigManager().apply_overrides({"average.size": 3})

    def test_n_max_needs_nodes(self):
        config = ConfigManager()
        config.apply_overrides({"weight.nodes": 8, "recurrence.n_max": 8})
        with pytest.raises(ConfigError):
            config.get_n_max()

    @pytest.mark.parametrize("n_max,ok", [(6, True), (7, False)])
    def test_n_max_boundary(self, n_max, ok):
        config = ConfigManager()
        config.apply_overrides({"weight.nodes": 8, "recurrence.n_max": n_max})
        if ok:
            assert config.get_n_max() == n_max
        else:
            with pytest.raises(ConfigError) as info:
                config.get_n_max()
            assert info.value.field == "recurrence.n_max"
            assert "n_max=7" in str(info.value)

    def test_m_exceeds_n(self):
        config = ConfigManager()
        config.apply_overrides({"average.N": 2, "average.M": 3})
        with pytest.raises(ConfigError) as info:
            config.check_counts()
        assert "M exceeds N" in str(info.value)

    def test_declared_counts_must_match(self):
        config = ConfigManager()
        config.apply_overrides({"average.N": 2, "average.K": 2, "shift.mu": ["3"]})
        with pytest.raises(ConfigError) as info:
            config.check_counts()
        assert info.value.field == "shift.mu"

    def test_too_many_poles(self):
        config = ConfigManager()
        config.apply_overrides({"average.N": 1, "shift.eps": ["2", "3"]})
        with pytest.raises(ConfigError):
            config.check_counts()

    def test_output_format(self):
        config = ConfigManager()
        config.apply_overrides({"output.format": "xml"})
        with pytest.raises(ConfigError):
            config.get_output()

    def test_invalid_suite(self):
        config = ConfigManager()
        config.apply_overrides({"verify.suite": "everything"})
        with pytest.raises(ConfigError):
            config.get_suite()

    def test_oracle_config(self):
        config = ConfigManager()
        config.apply_overrides({"oracle.nodes_per_dim": 12, "oracle.seed": 5})
        cfg = config.get_oracle_config(workers=2)
        assert cfg.nodes_per_dim == 12
        assert cfg.rng_seed == 5
        assert cfg.workers == 2

    def test_oracle_config_rejects_zero_nodes(self):
        config = ConfigManager()
        config.apply_overrides({"oracle.nodes_per_dim": 0})
        with pytest.raises(ConfigError):
            config.get_oracle_config()


class TestExampleConfig:

    def test_example_loads(self, tmp_path):
        path = str(tmp_path / "sub" / "example.json")
        create_example_config(path)
        config = ConfigManager(path)
        assert config.get_weight_spec().family == "gaussian-truncated"
        config.check_counts()
        assert config.get_shift().eps == (4 + 3j,)

    def test_save(self, tmp_path):
        config = ConfigManager()
        config.apply_overrides({"average.formula": "mixed"})
        path = str(tmp_path / "saved.json")
        assert config.save(path)
        assert ConfigManager(path).get_formula() == "mixed"
