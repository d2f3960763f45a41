"""Pipeline parameters and their flat ``key = value`` file format.

A config file holds one ``key = value`` pair per line; blank lines and text
after ``#`` are ignored. Unknown keys are rejected so that a typo in an
experiment script fails loudly instead of silently running on defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, Mapping

CONFIG_ENV_VAR = "LESIONSEG_CONFIG"

_CHOICES = {
    "tophat_polarity": ("black", "white"),
    "inpaint_method": ("telea", "diffusion"),
    "lesion_polarity": ("foreground_below", "foreground_above"),
    "color_mode": ("gray", "color"),
}

_RADII = (
    "median_radius", "tophat_radius", "hair_close_radius", "hair_dilate_radius",
    "marker_clean_radius", "bg_dilate_radius", "border_dilate_radius",
    "border_open_radius", "post_morph_radius",
)

_INTENSITIES = ("hair_threshold", "border_threshold", "border_fill_value")


class ConfigError(ValueError):
    """Invalid parameter value, unknown key or malformed config line."""


@dataclass(frozen=True)
class PipelineConfig:
    # Method 1: noise and hair removal
    median_radius: int = 2
    tophat_radius: int = 20
    tophat_polarity: str = "black"
    hair_threshold: int = 25
    hair_close_radius: int = 10
    hair_dilate_radius: int = 2
    inpaint_method: str = "telea"
    inpaint_radius: int = 20
    diffusion_iterations: int = 300
    # Method 1: markers
    lesion_polarity: str = "foreground_below"
    marker_clean_radius: int = 3
    bg_dilate_radius: int = 15
    fg_dist_fraction: float = 0.7
    # Method 2: border filling
    border_dilate_radius: int = 1
    border_open_radius: int = 5
    border_threshold: int = 90
    border_fill_value: int = 220
    # Method 2: mean shift
    spatial_bandwidth: int = 21
    color_bandwidth: float = 40.0
    pyramid_levels: int = 2
    max_iterations: int = 10
    convergence_eps: float = 1.0
    post_morph_radius: int = 5
    color_mode: str = "gray"
    # evaluation
    truth_suffix: str = "_segmentation"

    def __post_init__(self):
        for name in _RADII:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in _INTENSITIES:
            if not 0 <= getattr(self, name) <= 255:
                raise ConfigError(f"{name} must lie in [0, 255], got {getattr(self, name)}")
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if not 0.0 < self.fg_dist_fraction < 1.0:
            raise ConfigError(f"fg_dist_fraction must lie in (0, 1), got {self.fg_dist_fraction}")
        if self.inpaint_radius < 1:
            raise ConfigError(f"inpaint_radius must be >= 1, got {self.inpaint_radius}")
        if self.diffusion_iterations < 1:
            raise ConfigError("diffusion_iterations must be >= 1")
        if self.spatial_bandwidth < 1 or self.color_bandwidth < 1:
            raise ConfigError("spatial_bandwidth and color_bandwidth must be >= 1")
        if self.pyramid_levels < 0:
            raise ConfigError("pyramid_levels must be >= 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.convergence_eps < 0:
            raise ConfigError("convergence_eps must be >= 0")

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: Mapping[str, str]) -> "PipelineConfig":
        """Return a copy with string-valued overrides parsed to each field's type."""
        return self.replace(**{k: _parse_value(k, v) for k, v in overrides.items()})

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_format_value(getattr(self, f.name))}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        return cls().with_overrides(parse_assignments(text.splitlines(), comments=True))

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _parse_value(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_assignments(lines: Iterable[str], comments: bool = False) -> Dict[str, str]:
    """Split ``key = value`` / ``key=value`` strings into a dict."""
    out: Dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        if comments:
            line = line.split("#", 1)[0]
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = value.strip()
    return out
