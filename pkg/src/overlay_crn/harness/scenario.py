"""Scenario files: a versioned YAML mapping with a flat parameter namespace.

Example::

    schema: 1
    name: fig3
    params:
      P_T_dB: 10
      rho: 0.6
      n_p: 2
    sweep: {variable: P_T_dB, values: [0, 5, 10, 15, 20]}
    series: {variable: L_R, values: [1, 2, 3]}
    engines: [mc, analytic]
    mc: {trials: 1000000, seed: 1}

Powers are given in dB (``P_T_dB``); a bare ``P_T`` is rejected as
ambiguous.  Every error names the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from ..fading import CascadeSpec
from ..geometry import GeometrySpec
from ..linkmodel import SystemParams, db_to_linear
from ..meijer import SeriesBudget
from ..optimize import OptConfig
from ..simulate import McConfig

__all__ = [
    "SCHEMA_VERSION",
    "PARAM_DEFAULTS",
    "ScenarioError",
    "Axis",
    "Scenario",
    "build_params",
    "scenario_from_dict",
    "load_scenario",
    "dump_scenario",
]

SCHEMA_VERSION = 1

# flat scenario namespace with defaults; P_T_dB has no default
PARAM_DEFAULTS: dict[str, Any] = {
    "P_T_dB": None,
    "rho": 0.5,
    "eta": 0.8,
    "A_f": 0.5,
    "nu_p": 0.0,
    "nu_s": 0.0,
    "N_0": 1.0,
    "T": 1.0,
    "L_R": 1,
    "L_S": 1,
    "R_thp": 0.5,
    "R_ths": 0.5,
    "R_th": None,
    "R_pt": 0.0,
    "lambda_p": 0.5,
    "phi": 1.0,
    "U": 2,
    "alpha": 2.0,
    "delta": None,
    "k": 1,
    "kappa": 0.0,
    "mu": 1.0,
    "Omega": 1.0,
    "n_p": 1,
    "n_s": 1,
}

_AMBIGUOUS = {"P_T": "P_T_dB"}
_INT_KEYS = {"L_R", "L_S", "U", "k", "n_p", "n_s"}
_TOP_KEYS = {"schema", "name", "task", "params", "sweep", "series", "engines", "mc", "budget", "optimizer"}
_ENGINES = ("mc", "analytic")
_TASKS = ("outage", "optimize")


class ScenarioError(ValueError):
    """Invalid scenario content; ``field`` is the dotted path of the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class Axis:
    variable: str
    values: tuple


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict
    sweep: Axis
    series: Optional[Axis] = None
    engines: tuple = ("mc",)
    mc: McConfig = McConfig()
    budget: SeriesBudget = SeriesBudget()
    task: str = "outage"
    optimizer: OptConfig = field(default_factory=OptConfig)

    def points(self):
        """(series value, sweep value, flat params) in output order."""
        series_vals = self.series.values if self.series else (None,)
        for s in series_vals:
            for v in self.sweep.values:
                flat = dict(self.params)
                if self.series:
                    flat[self.series.variable] = s
                flat[self.sweep.variable] = v
                yield s, v, flat

    def system_params(self, flat: dict) -> SystemParams:
        return build_params(flat)


def _number(path: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(path, f"expected a finite number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ScenarioError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _check_param_key(path: str, key: str):
    if key in _AMBIGUOUS:
        raise ScenarioError(path, f"ambiguous unit; give the value in dB as {_AMBIGUOUS[key]}")
    if key not in PARAM_DEFAULTS:
        raise ScenarioError(path, "unknown field")


def _normalize_params(raw: dict, prefix: str = "params") -> dict:
    if not isinstance(raw, dict):
        raise ScenarioError(prefix, "expected a mapping")
    out = {}
    for key, value in raw.items():
        path = f"{prefix}.{key}"
        _check_param_key(path, key)
        if value is None:
            out[key] = None
            continue
        out[key] = _number(path, value, key in _INT_KEYS)
    return out


def build_params(flat: dict) -> SystemParams:
    """Turn a flat scenario mapping into validated SystemParams."""
    v = dict(PARAM_DEFAULTS)
    for key, value in flat.items():
        _check_param_key(f"params.{key}", key)
        if value is not None:
            v[key] = value
    if v["P_T_dB"] is None:
        raise ScenarioError("params.P_T_dB", "required")
    if v["R_th"] is not None:
        for name in ("R_thp", "R_ths"):
            if name in flat and flat[name] is not None and flat[name] != v["R_th"]:
                raise ScenarioError(f"params.{name}", "conflicts with R_th")
        v["R_thp"] = v["R_ths"] = v["R_th"]
    for key in _INT_KEYS:
        v[key] = _number(f"params.{key}", v[key], integer=True)

    def guarded(path, make):
        try:
            return make()
        except (ValueError, TypeError) as exc:
            raise ScenarioError(path, str(exc)) from None

    geom = guarded(
        "params.geometry",
        lambda: GeometrySpec(v["phi"], v["U"], v["alpha"], v["k"], v["delta"]),
    )
    rp = guarded("params.n_p", lambda: CascadeSpec.uniform(v["n_p"], v["kappa"], v["mu"], v["Omega"]))
    rs = guarded("params.n_s", lambda: CascadeSpec.uniform(v["n_s"], v["kappa"], v["mu"], v["Omega"]))
    fields_ = dict(
        P_T=db_to_linear(v["P_T_dB"]), rho=v["rho"], eta=v["eta"], A_f=v["A_f"], nu_p=v["nu_p"],
        nu_s=v["nu_s"], N_0=v["N_0"], T=v["T"], L_R=v["L_R"], L_S=v["L_S"], R_thp=v["R_thp"],
        R_ths=v["R_ths"], R_pt=v["R_pt"], lambda_p=v["lambda_p"],
    )
    try:
        return SystemParams(geometry=geom, rp_channel=rp, rs_channel=rs, **fields_)
    except ValueError as exc:
        msg = str(exc)
        name = msg.split("=", 1)[0].split(" ", 1)[0]
        path = "params.P_T_dB" if name == "P_T" else f"params.{name}"
        raise ScenarioError(path, msg) from None


def _axis(raw, path: str) -> Axis:
    if not isinstance(raw, dict):
        raise ScenarioError(path, "expected a mapping with 'variable' and 'values'")
    extra = set(raw) - {"variable", "values"}
    if extra:
        raise ScenarioError(f"{path}.{sorted(extra)[0]}", "unknown field")
    var = raw.get("variable")
    if not isinstance(var, str):
        raise ScenarioError(f"{path}.variable", "required string")
    _check_param_key(f"{path}.variable", var)
    values = raw.get("values")
    if not isinstance(values, (list, tuple)) or not values:
        raise ScenarioError(f"{path}.values", "expected a non-empty list")
    vals = tuple(_number(f"{path}.values[{i}]", x, var in _INT_KEYS) for i, x in enumerate(values))
    return Axis(var, vals)


def _sub_config(cls, raw, path: str, allowed: tuple):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ScenarioError(path, "expected a mapping")
    for key in raw:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}", "unknown field")
    try:
        return cls(**raw)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from None


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "expected a mapping")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ScenarioError(str(key), "unknown field")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ScenarioError("schema", f"expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "expected a non-empty string")
    task = doc.get("task", "outage")
    if task not in _TASKS:
        raise ScenarioError("task", f"expected one of {_TASKS}, got {task!r}")
    params = _normalize_params(doc.get("params", {}) or {})
    if "sweep" in doc:
        sweep = _axis(doc["sweep"], "sweep")
    else:
        if params.get("P_T_dB") is None:
            raise ScenarioError("params.P_T_dB", "required")
        sweep = Axis("P_T_dB", (params["P_T_dB"],))
    series = _axis(doc["series"], "series") if doc.get("series") is not None else None
    if series and series.variable == sweep.variable:
        raise ScenarioError("series.variable", "must differ from sweep.variable")
    engines = doc.get("engines", ["mc"])
    if isinstance(engines, str):
        engines = [engines]
    if not isinstance(engines, list) or not engines:
        raise ScenarioError("engines", "expected a non-empty list")
    for i, e in enumerate(engines):
        if e not in _ENGINES:
            raise ScenarioError(f"engines[{i}]", f"expected one of {_ENGINES}, got {e!r}")
    engines = tuple(e for e in _ENGINES if e in engines)
    mc = _sub_config(McConfig, doc.get("mc"), "mc", ("trials", "seed", "batch", "workers"))
    budget = _sub_config(SeriesBudget, doc.get("budget"), "budget", ("rel_tol", "max_index_per_sum"))
    opt_keys = ("rho0", "af0", "step0", "fd_h", "tol_obj", "tol_kkt", "max_outer", "max_inner",
                "box_margin", "penalty", "mode")
    optimizer = _sub_config(OptConfig, doc.get("optimizer"), "optimizer", opt_keys)
    scen = Scenario(name, params, sweep, series, engines, mc, budget, task, optimizer)
    for _, _, flat in scen.points():
        build_params(flat)
    return scen


def load_scenario(path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"not valid YAML: {exc}") from None
    return scenario_from_dict(doc)


def dump_scenario(s: Scenario) -> str:
    """YAML text that loads back to an equal Scenario."""
    doc = {
        "schema": SCHEMA_VERSION,
        "name": s.name,
        "task": s.task,
        "params": dict(s.params),
        "sweep": {"variable": s.sweep.variable, "values": list(s.sweep.values)},
    }
    if s.series:
        doc["series"] = {"variable": s.series.variable, "values": list(s.series.values)}
    doc["engines"] = list(s.engines)
    doc["mc"] = {"trials": s.mc.trials, "seed": s.mc.seed, "batch": s.mc.batch, "workers": s.mc.workers}
    doc["budget"] = {"rel_tol": s.budget.rel_tol, "max_index_per_sum": s.budget.max_index_per_sum}
    if s.task == "optimize":
        o = s.optimizer
        doc["optimizer"] = {"rho0": o.rho0, "af0": o.af0, "tol_kkt": o.tol_kkt, "mode": o.mode}
    return yaml.safe_dump(doc, sort_keys=False)
