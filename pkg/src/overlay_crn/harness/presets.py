"""Built-in scenarios reproducing the parameter sets of the result figures.

``CAPTIONS`` holds the parameter values stated with each figure.  Values a
caption leaves open (the swept variable, the curve family, and a few
unstated constants listed in ``FILLED``) are added on top to make each
scenario runnable.
"""

from __future__ import annotations

import numpy as np

from ..meijer import SeriesBudget
from ..optimize import OptConfig
from ..simulate import McConfig
from .scenario import Axis, Scenario, build_params

__all__ = ["CAPTIONS", "FILLED", "PRESETS", "preset", "preset_names"]

CAPTIONS: dict[str, dict] = {
    "fig3": dict(rho=0.6, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1,
                 R_thp=0.5, L_S=2, eta=0.8, A_f=0.8, phi=1, nu_s=0, nu_p=0),
    "fig4": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1,
                 R_ths=1, eta=0.8, A_f=0.2, phi=1, nu_p=0.2, nu_s=0.2, L_R=2),
    "fig5": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, kappa=0, mu=1, k=1, R_ths=1, eta=0.8,
                 A_f=0.2, nu_p=0.2, nu_s=0.2, L_R=2, L_S=1, P_T_dB=2, n_p=1),
    "fig6": dict(delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1, R_ths=0.5,
                 eta=0.8, A_f=0.9, L_R=2, L_S=1, P_T_dB=5, phi=0.5),
    "fig7": dict(delta=100, alpha=2, lambda_p=1, n_p=1, n_s=1, kappa=0, mu=1, nu_p=0, k=1,
                 R_thp=0.2, eta=0.7, P_T_dB=5, phi=100),
    "fig8": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=1, n_s=1, kappa=0, mu=1, k=1,
                 eta=0.8, A_f=0.5, nu_p=0.1, nu_s=0.1, L_R=2, L_S=1, phi=1),
    "fig9": dict(delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=0, mu=1, k=1, eta=0.8,
                 nu_p=0, nu_s=0, L_R=2, L_S=1, R_pt=0.4, phi=1),
    "surface_k_nu_s": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1,
                           R_ths=1, eta=0.8, A_f=0.1, nu_p=0.2, L_R=2, L_S=3, P_T_dB=5, phi=1),
}

# constants the captions leave unstated
FILLED: dict[str, dict] = {
    "fig3": {},
    "fig4": {},
    "fig5": {},
    "fig6": dict(R_thp=0.5),
    "fig7": dict(rho=0.5),
    "fig8": {},
    "fig9": dict(R_th=1.0, rho=0.5, A_f=0.5),
    "surface_k_nu_s": {},
}

_PT_GRID = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0)
_RHO_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


def _axes():
    return {
        "fig3": (Axis("P_T_dB", _PT_GRID), Axis("L_R", (1, 2, 3))),
        "fig4": (Axis("P_T_dB", _PT_GRID), Axis("L_S", (1, 2, 3))),
        "fig5": (Axis("phi", (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)), Axis("n_s", (1, 2, 3))),
        "fig6": (Axis("rho", _RHO_GRID), Axis("nu_p", (0.0, 0.2, 0.4))),
        # 1 - A_f increasing along the sweep
        "fig7": (Axis("A_f", tuple(round(1.0 - 0.05 * i, 2) for i in range(1, 20))), Axis("L_R", (1, 4))),
        "fig8": (Axis("P_T_dB", tuple(float(x) for x in np.arange(-10.0, 31.0, 2.5))),
                 Axis("R_th", (0.5, 1.0, 2.0))),
        "fig9": (Axis("P_T_dB", (0.0, 5.0, 10.0, 15.0, 20.0)), None),
        "surface_k_nu_s": (Axis("nu_s", (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)), Axis("k", (1, 2, 3, 4))),
    }


def _engines(name):
    if name == "fig8":
        return ("mc",)
    return ("mc", "analytic")


def preset(name: str, trials: int = 1_000_000, seed: int = 1) -> Scenario:
    if name not in CAPTIONS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(CAPTIONS)}")
    params = dict(CAPTIONS[name])
    params.update(FILLED[name])
    sweep, series = _axes()[name]
    params.setdefault(sweep.variable, sweep.values[0])
    if series is not None:
        params.setdefault(series.variable, series.values[0])
    if "P_T_dB" not in params:
        params["P_T_dB"] = sweep.values[0]
    task = "optimize" if name == "fig9" else "outage"
    scen = Scenario(
        name=name,
        params=params,
        sweep=sweep,
        series=series,
        engines=_engines(name),
        mc=McConfig(trials=trials, seed=seed),
        budget=SeriesBudget(),
        task=task,
        optimizer=OptConfig(rho0=0.5, af0=0.5),
    )
    for _, _, flat in scen.points():
        build_params(flat)
    return scen


def preset_names() -> list[str]:
    return list(CAPTIONS)


PRESETS = tuple(CAPTIONS)
