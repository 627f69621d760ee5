"""HPPP relay placement and the path loss of the k-th nearest relay."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

__all__ = [
    "GeometrySpec",
    "pathloss_pdf",
    "pathloss_cdf",
    "mean_pathloss",
    "sample_kth_pathloss",
    "generate_hppp_window",
    "kth_nearest_pathloss",
]


@dataclass(frozen=True)
class GeometrySpec:
    """Relay density, space dimension, path-loss exponent and selection order.

    ``delta_override`` replaces the derived shape U/alpha when a scenario
    quotes delta directly.
    """

    density: float = 1.0
    dimension: int = 2
    pathloss_exp: float = 2.0
    order: int = 1
    delta_override: Optional[float] = None

    def __post_init__(self):
        if not (self.density > 0 and math.isfinite(self.density)):
            raise ValueError(f"density must be > 0, got {self.density}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be an integer >= 1, got {self.dimension}")
        if not self.pathloss_exp > 0:
            raise ValueError(f"pathloss_exp must be > 0, got {self.pathloss_exp}")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be an integer >= 1, got {self.order}")
        if self.delta_override is not None and not self.delta_override > 0:
            raise ValueError(f"delta must be > 0, got {self.delta_override}")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def delta(self) -> float:
        if self.delta_override is not None:
            return float(self.delta_override)
        return self.dimension / self.pathloss_exp

    @property
    def area_factor(self) -> float:
        """A_e = pi * density."""
        return math.pi * self.density


def pathloss_pdf(x, spec: GeometrySpec):
    """Density of d^alpha for the k-th nearest relay.

    exp(-A_e x^delta) delta A_e^k x^(delta k - 1) / Gamma(k)
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("path-loss density is defined for x > 0")
    d, k, ae = spec.delta, spec.order, spec.area_factor
    logv = -ae * x**d + math.log(d) + k * math.log(ae) + (d * k - 1) * np.log(x) - math.lgamma(k)
    out = np.exp(logv)
    return out if out.ndim else float(out)


def pathloss_cdf(x, spec: GeometrySpec):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("path-loss CDF is defined for x >= 0")
    out = special.gammainc(spec.order, spec.area_factor * x**spec.delta)
    return out if np.ndim(out) else float(out)


def mean_pathloss(spec: GeometrySpec) -> float:
    """E[d^alpha] = Gamma(k + 1/delta) / (Gamma(k) A_e^(1/delta))."""
    d, k = spec.delta, spec.order
    return math.exp(math.lgamma(k + 1.0 / d) - math.lgamma(k) - math.log(spec.area_factor) / d)


def sample_kth_pathloss(spec: GeometrySpec, rng: np.random.Generator, size=None):
    """Draw d^alpha: y ~ Gamma(k, rate A_e), return y^(1/delta)."""
    y = rng.gamma(spec.order, 1.0 / spec.area_factor, size)
    return y ** (1.0 / spec.delta)


def generate_hppp_window(density: float, side: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson point set in the square [-side/2, side/2]^2, shape (N, 2)."""
    if density < 0 or side <= 0:
        raise ValueError("density must be >= 0 and side > 0")
    count = rng.poisson(density * side * side)
    return rng.uniform(-0.5 * side, 0.5 * side, size=(count, 2))


def kth_nearest_pathloss(points: np.ndarray, order: int, pathloss_exp: float) -> float:
    """d^alpha of the ``order``-th nearest point to the origin (nan if too few)."""
    if len(points) < order:
        return math.nan
    r2 = np.einsum("ij,ij->i", points, points)
    kth = np.partition(r2, order - 1)[order - 1]
    return float(kth ** (0.5 * pathloss_exp))
