"""Pipeline configuration.

Defaults are the settings used to label the original robot datasets, so an
unconfigured run reproduces them.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

_FRACTIONS = ("movement_threshold", "still_eps", "rdp_eps_path", "rdp_eps_mask", "mask_edge_frac")


@dataclass(frozen=True)
class PipelineConfig:
    movement_threshold: float = 0.05
    stop_window: int = 5
    still_eps: float = 0.01
    grid_side: int = 20
    rdp_eps_path: float = 0.05
    rdp_eps_mask: float = 0.1
    mask_edge_frac: float = 0.08
    label_period: int = 30
    rollout_period: int = 25
    trim_frac: float = 0.2
    resample_count: int = 5
    raster_size: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        for name in _FRACTIONS:
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must be a fraction in (0, 1), got {v}")
        # trim 0 disables trimming and resampling windows
        if not 0.0 <= self.trim_frac < 1.0:
            raise ConfigError(f"trim_frac must be in [0, 1), got {self.trim_frac}")
        for name in ("stop_window", "label_period", "rollout_period", "raster_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 15 <= self.grid_side <= 30:
            raise ConfigError(f"grid_side must be in [15, 30], got {self.grid_side}")
        if self.resample_count < 0:
            raise ConfigError(f"resample_count must be >= 0, got {self.resample_count}")

    def replace(self, **overrides: Any) -> PipelineConfig:
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> PipelineConfig:
        return cls().replace(**coerce_values(values))


def coerce_values(values: Mapping[str, Any]) -> dict[str, Any]:
    """Convert raw (usually string) values to the declared field types."""
    types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    out = {}
    for key, raw in values.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        kind = int if types[key] in (int, "int") else float
        try:
            out[key] = kind(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None
    return out


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file. Blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values
