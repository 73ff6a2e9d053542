"""Committed scenario presets shipped with the package."""
from __future__ import annotations

from importlib import resources

from .config import ScenarioConfig, load_scenario

PRESET_NAMES = (
    "scenario1",
    "scenario2",
    "scenario3-low",
    "scenario3-high",
    "iwfp-topology",
    "iwfp-ceiling",
)


def preset_path(name: str):
    """Filesystem path of a packaged preset config."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files(__package__) / "presets" / f"{name}.json"


def load_preset(name: str) -> ScenarioConfig:
    with resources.as_file(preset_path(name)) as path:
        return load_scenario(path)
