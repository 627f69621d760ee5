"""Overlay cognitive-radio network with energy-harvesting AF relays.

Monte-Carlo and Meijer-G based evaluation of outage, throughput and energy
efficiency, plus alternating optimization of the time-switching and
power-allocation factors.
"""

from .analysis import (
    OutageResult,
    energy_efficiency,
    outage_pu_closed_form,
    outage_su_closed_form,
    throughput,
)
from .fading import CascadeSpec, ExpMrcSpec, KappaMuSpec
from .geometry import GeometrySpec
from .linkmodel import DerivedConstants, SystemParams, db_to_linear
from .meijer import MeijerGSpec, SeriesBudget, meijer_g
from .optimize import OptConfig, OptResult, solve_biconvex
from .simulate import McConfig, McEstimate, estimate_metrics, estimate_outage

__version__ = "0.1.0"

__all__ = [
    "CascadeSpec",
    "DerivedConstants",
    "ExpMrcSpec",
    "GeometrySpec",
    "KappaMuSpec",
    "McConfig",
    "McEstimate",
    "MeijerGSpec",
    "OptConfig",
    "OptResult",
    "OutageResult",
    "SeriesBudget",
    "SystemParams",
    "db_to_linear",
    "energy_efficiency",
    "estimate_metrics",
    "estimate_outage",
    "meijer_g",
    "outage_pu_closed_form",
    "outage_su_closed_form",
    "solve_biconvex",
    "throughput",
]
