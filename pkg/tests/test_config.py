from __future__ import annotations

import pytest

from peek.config import PipelineConfig, coerce_values, read_config_file
from peek.errors import ConfigError


def test_defaults():
    c = PipelineConfig()
    assert (c.movement_threshold, c.stop_window, c.rdp_eps_path, c.rdp_eps_mask) == (0.05, 5, 0.05, 0.1)
    assert (c.label_period, c.rollout_period, c.trim_frac, c.resample_count) == (30, 25, 0.2, 5)


@pytest.mark.parametrize("field,value", [
    ("movement_threshold", 0.0), ("movement_threshold", 1.0), ("grid_side", 14), ("grid_side", 31),
    ("trim_frac", 1.0), ("stop_window", 0), ("resample_count", -1), ("mask_edge_frac", 1.5),
])
def test_out_of_range_values_raise(field, value):
    with pytest.raises(ConfigError):
        PipelineConfig().replace(**{field: value})


def test_trim_zero_is_allowed():
    assert PipelineConfig(trim_frac=0.0).trim_frac == 0.0


def test_config_file_and_coercion(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nstop_window = 7\n\nmovement_threshold=0.04  # inline\n")
    values = coerce_values(read_config_file(f))
    assert values == {"stop_window": 7, "movement_threshold": 0.04}
    assert PipelineConfig.from_mapping(read_config_file(f)).stop_window == 7


def test_config_file_errors(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("bogus = 1\n")
    with pytest.raises(ConfigError, match="unknown"):
        coerce_values(read_config_file(f))
    f.write_text("stop_window 5\n")
    with pytest.raises(ConfigError):
        read_config_file(f)
    with pytest.raises(ConfigError, match="cannot parse"):
        coerce_values({"stop_window": "five"})
