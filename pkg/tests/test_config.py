import json

import pytest

from resmaster.config import ConfigError, parse_config, serialize_config
from resmaster.pipeline import PipelineConfig


class TestParseConfig:
    def test_no_file_gives_defaults(self):
        config = parse_config(None, {})
        assert config == PipelineConfig()
        assert config.d0 == 0.8
        assert config.lam == 0.8
        assert config.seed == 0

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        assert parse_config(path, {}) == PipelineConfig()

    def test_file_values_applied(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"version": 1, "d0": 0.5, "steps": 20,
                                    "window": [16, 16], "stride": 8}))
        config = parse_config(path, {})
        assert config.d0 == 0.5
        assert config.steps == 20
        assert (config.win_h, config.win_w) == (16, 16)
        assert (config.stride_h, config.stride_w) == (8, 8)

    def test_cli_flag_overrides_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"d0": 0.5}))
        assert parse_config(path, {"d0": 0.9}).d0 == 0.9

    def test_aggregated_validation_report(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"d0": -1.0, "lam": -2.0, "scale": 0}))
        with pytest.raises(ConfigError) as err:
            parse_config(path, {})
        message = str(err.value)
        assert "d0" in message and "lambda" in message and "scale" in message

    def test_geometry_error_names_axis(self):
        with pytest.raises(ConfigError, match="width axis"):
            parse_config(None, {"stride": [32, 48]})

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"d_zero": 0.5}))
        with pytest.raises(ConfigError, match="unknown configuration key"):
            parse_config(path, {})

    def test_bad_json_names_position(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{\n  broken")
        with pytest.raises(ConfigError, match="line 2"):
            parse_config(path, {})

    def test_wrong_types_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"steps": "many", "d0": True}))
        with pytest.raises(ConfigError) as err:
            parse_config(path, {})
        assert "steps" in str(err.value) and "d0" in str(err.value)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"version": 99}))
        with pytest.raises(ConfigError, match="version"):
            parse_config(path, {})

    def test_unknown_schedule_choice(self):
        with pytest.raises(ConfigError, match="schedule"):
            parse_config(None, {"schedule": "cosine"})


class TestSerializeConfig:
    def test_parse_serialize_parse_fixed_point(self, tmp_path):
        original = parse_config(None, {"d0": 0.44, "steps": 17, "seed": 9,
                                       "window": [32, 16], "stride": [32, 16],
                                       "schedule": "linear"})
        path = tmp_path / "round.json"
        path.write_text(json.dumps(serialize_config(original)))
        reparsed = parse_config(path, {})
        assert reparsed == original
        path.write_text(json.dumps(serialize_config(reparsed)))
        assert parse_config(path, {}) == reparsed

    def test_serialized_doc_carries_version(self):
        doc = serialize_config(PipelineConfig())
        assert doc["version"] == 1
        assert list(doc)[0] == "version"
