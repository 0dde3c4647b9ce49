"""Figure presets, configuration handling and the batch runner."""

from .config import ExperimentConfig, config_from_dict, parse_angle
from .runner import RunManifest, emit_dispersion, read_table, run
from .scenarios import SCENARIOS, build_config, scenario_names

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "SCENARIOS",
    "build_config",
    "config_from_dict",
    "emit_dispersion",
    "parse_angle",
    "read_table",
    "run",
    "scenario_names",
]
