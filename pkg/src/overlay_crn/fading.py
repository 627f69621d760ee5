"""Channel power-gain laws: kappa-mu, cascaded kappa-mu and Erlang MRC sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

__all__ = [
    "KappaMuSpec",
    "CascadeSpec",
    "ExpMrcSpec",
    "sample_kappa_mu_power",
    "sample_cascaded_power",
    "sample_mrc_power_sum",
    "pdf_kappa_mu_power",
    "pdf_exp_mrc",
    "cdf_exp_mrc",
]

# products of more stages than this are accumulated as sums of logs
_LOG_PRODUCT_STAGES = 4


@dataclass(frozen=True)
class KappaMuSpec:
    """One kappa-mu fading stage.

    kappa is the dominant-to-scattered power ratio, mu the number of
    multipath clusters and mean_power the mean of the power gain.
    """

    kappa: float = 0.0
    mu: float = 1.0
    mean_power: float = 1.0

    def __post_init__(self):
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not (self.mean_power > 0 and math.isfinite(self.mean_power)):
            raise ValueError(f"mean_power must be > 0, got {self.mean_power}")

    @property
    def rate(self) -> float:
        """Rate of the Gamma components in the Poisson-Gamma mixture."""
        return self.mu * (1.0 + self.kappa) / self.mean_power

    @property
    def poisson_mean(self) -> float:
        return self.kappa * self.mu


@dataclass(frozen=True)
class CascadeSpec:
    """Product of independent kappa-mu stages (cascade level = len(stages))."""

    stages: tuple

    def __post_init__(self):
        stages = tuple(self.stages)
        if len(stages) < 1:
            raise ValueError("a cascade needs at least one stage")
        for s in stages:
            if not isinstance(s, KappaMuSpec):
                raise TypeError(f"cascade stages must be KappaMuSpec, got {type(s).__name__}")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def uniform(cls, n: int, kappa: float = 0.0, mu: float = 1.0, mean_power: float = 1.0):
        return cls(tuple(KappaMuSpec(kappa, mu, mean_power) for _ in range(int(n))))

    @property
    def level(self) -> int:
        return len(self.stages)

    @property
    def mean(self) -> float:
        return math.prod(s.mean_power for s in self.stages)


@dataclass(frozen=True)
class ExpMrcSpec:
    """MRC sum of ``branches`` i.i.d. exponential powers with rate ``rate``."""

    rate: float
    branches: int = 1

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be > 0, got {self.rate}")
        if int(self.branches) != self.branches or self.branches < 1:
            raise ValueError(f"branches must be an integer >= 1, got {self.branches}")
        object.__setattr__(self, "branches", int(self.branches))


Channel = Union[KappaMuSpec, CascadeSpec]


def sample_kappa_mu_power(spec: KappaMuSpec, rng: np.random.Generator, size=None):
    """Draw kappa-mu power gains.

    Uses the Poisson mixture of Gammas behind the noncentral chi-square law:
    P ~ Poisson(kappa mu), G ~ Gamma(mu + P, 1), power = G / rate.
    """
    extra = rng.poisson(spec.poisson_mean, size) if spec.kappa > 0 else 0
    return rng.gamma(spec.mu + extra, 1.0, size) / spec.rate


def sample_cascaded_power(spec: CascadeSpec, rng: np.random.Generator, size=None):
    """Draw power gains of the product channel (product of per-stage powers)."""
    if spec.level > _LOG_PRODUCT_STAGES:
        acc = 0.0
        for stage in spec.stages:
            acc = acc + np.log(sample_kappa_mu_power(stage, rng, size))
        return np.exp(acc)
    out = sample_kappa_mu_power(spec.stages[0], rng, size)
    for stage in spec.stages[1:]:
        out = out * sample_kappa_mu_power(stage, rng, size)
    return out


def sample_mrc_power_sum(spec: Channel, branches: int, rng: np.random.Generator, size=None):
    """Sum of ``branches`` independent power draws from ``spec``."""
    if branches < 1:
        raise ValueError("branches must be >= 1")
    draw = sample_kappa_mu_power if isinstance(spec, KappaMuSpec) else sample_cascaded_power
    out = draw(spec, rng, size)
    for _ in range(branches - 1):
        out = out + draw(spec, rng, size)
    return out


def pdf_kappa_mu_power(x, spec: KappaMuSpec):
    """Closed-form kappa-mu power density (modified Bessel form)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("kappa-mu density is defined for x >= 0")
    k, mu, om = spec.kappa, spec.mu, spec.mean_power
    y = x / om
    with np.errstate(divide="ignore", invalid="ignore"):
        if k == 0:
            out = mu**mu * y ** (mu - 1) * np.exp(-mu * y) / special.gamma(mu)
        else:
            arg = 2.0 * mu * np.sqrt(k * (1.0 + k) * y)
            # ive keeps the Bessel factor finite for large arguments
            log_pref = (
                math.log(mu)
                + 0.5 * (mu + 1) * math.log1p(k)
                - 0.5 * (mu - 1) * math.log(k)
                - k * mu
                + 0.5 * (mu - 1) * np.log(y)
                - mu * (1 + k) * y
                + arg
            )
            out = np.exp(log_pref) * special.ive(mu - 1, arg)
    return out / om


def _check_nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("argument must be >= 0")
    return x


def pdf_exp_mrc(x, spec: ExpMrcSpec):
    """Erlang(branches, rate) density of the MRC power sum."""
    x = _check_nonneg(x)
    lam, n = spec.rate, spec.branches
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = n * math.log(lam) + (n - 1) * np.log(x) - lam * x - math.lgamma(n)
    out = np.exp(logv)
    if n == 1:
        out = np.where(x == 0, lam, out)
    return out if out.ndim else float(out)


def cdf_exp_mrc(x, spec: ExpMrcSpec):
    """Erlang CDF, 1 - sum_{i<L} (lam x)^i e^{-lam x} / i!."""
    x = _check_nonneg(x)
    out = special.gammainc(spec.branches, spec.rate * x)
    return out if np.ndim(out) else float(out)

