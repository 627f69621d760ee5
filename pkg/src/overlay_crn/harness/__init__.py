"""Scenario files, figure presets, sweeps, output writers and the CLI."""

from .output import emit_csv, emit_plotdata, read_csv
from .presets import CAPTIONS, FILLED, preset, preset_names
from .runner import ResultRow, run_scenario
from .scenario import Axis, Scenario, ScenarioError, build_params, load_scenario, scenario_from_dict
from .validation import run_validation, validation_points

__all__ = [
    "Axis",
    "CAPTIONS",
    "FILLED",
    "ResultRow",
    "Scenario",
    "ScenarioError",
    "build_params",
    "emit_csv",
    "emit_plotdata",
    "load_scenario",
    "preset",
    "preset_names",
    "read_csv",
    "run_scenario",
    "run_validation",
    "scenario_from_dict",
    "validation_points",
]
