import pytest
import yaml
from pydantic import ValidationError

from src.wpdiff.adapters.config_file import dump_config, load_config, parse_config
from src.wpdiff.service_layer import scenarios
from tests.utils import SMALL_ANALYTIC_CONFIG, SMALL_SCHRODINGER_CONFIG, write_yaml


class TestConfigFile:
    def test_parses_sections(self):
        config = parse_config(SMALL_SCHRODINGER_CONFIG)
        assert config.run.mode == "schrodinger1d"
        assert config.grid.snapshot_times == (0.5,)
        assert config.potential is None

    def test_round_trip(self, tmp_path):
        for text in (SMALL_SCHRODINGER_CONFIG, SMALL_ANALYTIC_CONFIG):
            config = parse_config(text)
            path = tmp_path / "config.yaml"
            dump_config(config, path)
            again = load_config(path)
            assert again == config
            assert scenarios.defaulted_parameters(again) == scenarios.defaulted_parameters(config)

    def test_presets_round_trip(self):
        for name in ("fig1", "fig8", "fig10"):
            config = scenarios.PRESETS[name]()
            assert parse_config(dump_config(config)) == config

    def test_floats_keep_full_precision(self):
        config = parse_config(SMALL_SCHRODINGER_CONFIG.replace("sigma: 1.0", "sigma: 0.30000000000000004"))
        assert parse_config(dump_config(config)).packet.sigma == 0.1 + 0.2

    def test_dump_is_sorted(self):
        text = dump_config(parse_config(SMALL_ANALYTIC_CONFIG))
        top_level = [line.split(":")[0] for line in text.splitlines() if not line.startswith(" ")]
        assert top_level == sorted(top_level)

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            parse_config(SMALL_SCHRODINGER_CONFIG.replace("label: snap", "colour: red"))

    def test_invalid_value(self):
        with pytest.raises(ValidationError):
            parse_config(SMALL_SCHRODINGER_CONFIG.replace("sigma: 1.0", "sigma: -1.0"))

    def test_mode_needs_its_sections(self):
        with pytest.raises(ValidationError):
            parse_config(SMALL_SCHRODINGER_CONFIG.replace("schrodinger1d", "dirac1d"))

    def test_not_a_mapping(self):
        with pytest.raises(ValueError, match="mapping"):
            parse_config("- a\n- b\n")

    def test_malformed_yaml(self):
        with pytest.raises(yaml.YAMLError):
            parse_config("run: [unclosed\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "absent.yaml")

    def test_loads_from_disk(self, tmp_path):
        path = write_yaml(tmp_path / "analytic.yaml", SMALL_ANALYTIC_CONFIG)
        assert load_config(path).potential.v0 == -1.0
