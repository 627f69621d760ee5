"""Per-realization link physics: harvesting, relay power, SINRs and rates.

All quantities are linear (watts, power gains); dB conversion happens when a
scenario is loaded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fading import CascadeSpec, ExpMrcSpec
from .geometry import GeometrySpec

__all__ = [
    "SystemParams",
    "DerivedConstants",
    "ChannelRealization",
    "harvested_energy",
    "relay_power",
    "amplification_factor",
    "sinr_pu",
    "sinr_su",
    "sinr_pu_signal_model",
    "rate",
    "db_to_linear",
]


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def _check(name, value, lo, hi, lo_open=False, hi_open=False):
    ok = math.isfinite(value)
    ok = ok and (value > lo if lo_open else value >= lo)
    ok = ok and (value < hi if hi_open else value <= hi)
    if not ok:
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ValueError(f"{name}={value!r} outside {left}{lo}, {hi}{right}")


@dataclass(frozen=True)
class SystemParams:
    """Every scenario quantity, in linear units.

    ``A_f``, ``nu_p`` and ``nu_s`` accept their closed end points so that
    degenerate configurations (no PU power, everything harvested) can be
    evaluated; ``rho`` must lie strictly inside (0, 1).
    """

    P_T: float
    rho: float
    eta: float
    A_f: float
    nu_p: float = 0.0
    nu_s: float = 0.0
    N_0: float = 1.0
    T: float = 1.0
    L_R: int = 1
    L_S: int = 1
    R_thp: float = 0.5
    R_ths: float = 0.5
    R_pt: float = 0.0
    lambda_p: float = 0.5
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    rp_channel: CascadeSpec = field(default_factory=lambda: CascadeSpec.uniform(1))
    rs_channel: CascadeSpec = field(default_factory=lambda: CascadeSpec.uniform(1))

    def __post_init__(self):
        _check("P_T", self.P_T, 0, math.inf, lo_open=True, hi_open=True)
        _check("rho", self.rho, 0, 1, lo_open=True, hi_open=True)
        _check("eta", self.eta, 0, 1, lo_open=True)
        _check("A_f", self.A_f, 0, 1)
        _check("nu_p", self.nu_p, 0, 1)
        _check("nu_s", self.nu_s, 0, 1)
        _check("N_0", self.N_0, 0, math.inf, lo_open=True, hi_open=True)
        _check("T", self.T, 0, math.inf, lo_open=True, hi_open=True)
        for name in ("R_thp", "R_ths", "R_pt"):
            _check(name, getattr(self, name), 0, math.inf, hi_open=True)
        _check("lambda_p", self.lambda_p, 0, math.inf, lo_open=True, hi_open=True)
        for name in ("L_R", "L_S"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def pr_channel(self) -> ExpMrcSpec:
        return ExpMrcSpec(self.lambda_p, self.L_R)

    @property
    def n_p(self) -> int:
        return self.rp_channel.level

    @property
    def n_s(self) -> int:
        return self.rs_channel.level


@dataclass(frozen=True)
class DerivedConstants:
    """SINR coefficients and outage thresholds for one parameter set.

    c1, c2 (resp. d1, d2) are +inf when the PU (resp. SU) threshold sits at
    or above the SINR ceiling a/c (resp. q/w).
    """

    a: float
    b: float
    c: float
    q: float
    e: float
    w: float
    J: float
    eps_e: float
    c1: float
    c2: float
    d1: float
    d2: float

    @classmethod
    def from_params(cls, p: SystemParams) -> "DerivedConstants":
        u = p.rho * p.eta / (1.0 - p.rho)
        a = (1.0 - p.nu_p) * p.A_f * u * p.P_T
        b = p.N_0 * p.A_f * u
        c = (1.0 - p.A_f) * u * p.P_T
        q = (1.0 - p.nu_s) * (1.0 - p.A_f) * u * p.P_T
        e = p.N_0 * p.A_f * u
        w = p.A_f * u * p.P_T
        slot = (1.0 - p.rho) * p.T
        J = 2.0 ** (p.R_thp / slot) - 1.0
        eps = 2.0 ** (p.R_ths / slot) - 1.0
        gap_p = a - J * c
        gap_s = q - eps * w
        if gap_p > 0:
            c1, c2 = b * J / gap_p, p.N_0 * J / gap_p
        else:
            c1 = c2 = math.inf
        if gap_s > 0:
            d1, d2 = eps * p.N_0 / gap_s, eps * e / gap_s
        else:
            d1 = d2 = math.inf
        return cls(a, b, c, q, e, w, J, eps, c1, c2, d1, d2)

    @property
    def feasible_p(self) -> bool:
        return self.a - self.J * self.c > 0

    @property
    def feasible_s(self) -> bool:
        return self.q - self.eps_e * self.w > 0


@dataclass(frozen=True)
class ChannelRealization:
    """Power gains of one network draw (scalars or equally shaped arrays)."""

    G_PR: object
    g_RP: object
    G_RS: object
    d_alpha: object


def _positive_pathloss(d_alpha):
    d = np.asarray(d_alpha, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("path loss d^alpha must be > 0")
    return d


def harvested_energy(p: SystemParams, h_pr_power, d_alpha):
    """rho eta P_T T h / d^alpha, in joules."""
    d = _positive_pathloss(d_alpha)
    out = p.rho * p.eta * p.P_T * p.T * np.asarray(h_pr_power, dtype=float) / d
    return out if out.ndim else float(out)


def relay_power(p: SystemParams, h_pr_power, d_alpha):
    """Relay transmit power E_p / ((1 - rho) T)."""
    return harvested_energy(p, h_pr_power, d_alpha) / ((1.0 - p.rho) * p.T)


def amplification_factor(p: SystemParams, P_k, G_PR, d_alpha, approximate: bool = True, noise=None):
    """AF gain sqrt(A_f P_k / (P_T G_PR / d^alpha + N_0)).

    ``approximate`` drops N_0 from the denominator (high-SNR form).  ``noise``
    overrides the N_0 used in the exact form only.
    """
    d = _positive_pathloss(d_alpha)
    g = np.asarray(G_PR, dtype=float)
    received = p.P_T * g / d
    if approximate:
        if np.any(~(g > 0)):
            raise ValueError("approximate amplification factor needs G_PR > 0")
        denom = received
    else:
        denom = received + (p.N_0 if noise is None else noise)
        if np.any(~(denom > 0)):
            raise ValueError("amplification factor denominator must be > 0")
    out = np.sqrt(p.A_f * np.asarray(P_k, dtype=float) / denom)
    return out if out.ndim else float(out)


def sinr_pu(dc: DerivedConstants, r: ChannelRealization, N_0: float):
    """a X / (b g_RP + c X + N_0) with X = g_RP G_PR / d^alpha."""
    g = np.asarray(r.g_RP, dtype=float)
    x = g * np.asarray(r.G_PR, dtype=float) / np.asarray(r.d_alpha, dtype=float)
    out = dc.a * x / (dc.b * g + dc.c * x + N_0)
    return out if out.ndim else float(out)


def sinr_su(dc: DerivedConstants, r: ChannelRealization, N_0: float):
    """q X / (e G_RS + w X + N_0) with X = G_RS G_PR / d^alpha."""
    g = np.asarray(r.G_RS, dtype=float)
    x = g * np.asarray(r.G_PR, dtype=float) / np.asarray(r.d_alpha, dtype=float)
    out = dc.q * x / (dc.e * g + dc.w * x + N_0)
    return out if out.ndim else float(out)


def sinr_pu_signal_model(p: SystemParams, r: ChannelRealization, approximate: bool = True, lambda_noise=None):
    """PU SINR built from the received-signal terms before simplification.

    (1 - nu_p) L^2 g P_T G / d  /  (N_0 g L^2 + g (1 - A_f) P_k + N_0)
    """
    P_k = relay_power(p, r.G_PR, r.d_alpha)
    lam2 = amplification_factor(p, P_k, r.G_PR, r.d_alpha, approximate, lambda_noise) ** 2
    g = np.asarray(r.g_RP, dtype=float)
    sig = (1.0 - p.nu_p) * lam2 * g * p.P_T * np.asarray(r.G_PR, dtype=float) / np.asarray(r.d_alpha)
    out = sig / (p.N_0 * g * lam2 + g * (1.0 - p.A_f) * P_k + p.N_0)
    return out if np.ndim(out) else float(out)


def rate(gamma, rho: float, T: float = 1.0):
    """(1 - rho) T log2(1 + gamma) in bits/s/Hz."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SINR must be >= 0")
    out = (1.0 - rho) * T * np.log2(1.0 + g)
    return out if out.ndim else float(out)
