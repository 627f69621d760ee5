"""Analytic outage probability, throughput and energy efficiency.

Both outage events have the form

    G_PR <= D * (alpha1 + alpha2 / H)

with D = d^alpha the path loss of the selected relay, G_PR ~ Erlang(L_R,
lambda_p) the MRC gain at the relay, and H the receive-side fading power
(g_RP for the PU, the MRC sum G_RS for the SU).  Averaging the Erlang CDF
first over D and then over H, with H written as a Poisson mixture of
products of Gamma variables, turns every term into a single Meijer G-function.

Three evaluation routes are used:

* ``closed-form`` (delta = 1, H a single cascade): one G^{1,n+1}_{n+1,1} per
  term of the Poisson series.
* ``pathloss-quadrature`` (any delta, H a single cascade): H-averages are
  G^{n+1,0}_{0,n+1} functions; the path-loss average is a trapezoidal rule in
  log(A_e D^delta).
* ``laplace-quadrature`` (delta = 1, H a sum of L >= 2 cascades with n >= 2):
  H-averages of the form E[H^p (B H + C)^-m] are written as a one-dimensional
  Laplace integral whose integrand factorizes over the MRC branches into
  G^{1,n}_{n,1} functions.

MRC sums of single-stage kappa-mu branches collapse exactly to one kappa-mu
stage with mu' = L mu, so they use the first two routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .fading import CascadeSpec, KappaMuSpec
from .geometry import GeometrySpec
from .linkmodel import DerivedConstants, SystemParams
from .meijer import (
    MeijerGSpec,
    SeriesBudget,
    UnsupportedParametersError,
    compositions,
    meijer_g,
    multinomial,
    truncated_nested_sum,
)

__all__ = [
    "OutageResult",
    "Throughput",
    "SeriesCoefficients",
    "CascadeLaw",
    "series_coefficients",
    "pdf_cascaded_power",
    "outage_pu_closed_form",
    "outage_su_closed_form",
    "throughput",
    "energy_efficiency",
]

# converged values further than this outside [0, 1] are reported, not clipped
_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class OutageResult:
    value: float
    converged: bool
    shells_used: int
    feasible: bool
    method: str = ""


@dataclass(frozen=True)
class Throughput:
    tau_p: float
    tau_s: float
    tau: float


@dataclass(frozen=True)
class CascadeLaw:
    """Poisson-Gamma representation of a cascaded kappa-mu power.

    Given Poisson indices r_l ~ Poisson(kappa_l mu_l), the power equals
    prod_l Gamma(mu_l + r_l, 1) / theta with theta = prod_l rate_l.
    """

    shapes: tuple
    rates: tuple
    poisson_means: tuple

    @classmethod
    def from_cascade(cls, spec: CascadeSpec) -> "CascadeLaw":
        return cls(
            tuple(s.mu for s in spec.stages),
            tuple(s.rate for s in spec.stages),
            tuple(s.poisson_mean for s in spec.stages),
        )

    @property
    def depth(self) -> int:
        return len(self.shapes)

    @property
    def theta(self) -> float:
        return math.prod(self.rates)

    def log_weight(self, r) -> float:
        out = 0.0
        for lam, ri in zip(self.poisson_means, r):
            if lam == 0:
                if ri:
                    return -math.inf
                continue
            out += ri * math.log(lam) - lam - math.lgamma(ri + 1)
        return out

    def shapes_at(self, r) -> tuple:
        return tuple(m + ri for m, ri in zip(self.shapes, r))

    def moment(self, s: float) -> float:
        """E[power^s] for real s > -min(mu)."""
        out = 1.0
        for mu, rate, lam in zip(self.shapes, self.rates, self.poisson_means):
            base = math.exp(math.lgamma(mu + s) - math.lgamma(mu) - s * math.log(rate))
            if lam > 0:
                base *= math.exp(-lam) * special.hyp1f1(mu + s, mu, lam)
            out *= base
        return out


@dataclass(frozen=True)
class SeriesCoefficients:
    """Per-index prefactor of the cascaded-power density series.

    ``c_x`` is the product prefactor multiplying x^(b_1 - 1) G^{n,0}_{0,n}
    in the density, ``beta`` the shifted b-parameters of that G-function.
    """

    c_x: float
    beta: tuple
    shapes: tuple


def series_coefficients(law: CascadeLaw, r) -> SeriesCoefficients:
    b = law.shapes_at(r)
    logc = law.log_weight(r) + b[0] * math.log(law.theta) - sum(math.lgamma(v) for v in b)
    c_x = 2.0 * math.exp(logc) if math.isfinite(logc) else 0.0
    beta = tuple(v - b[0] for v in b)
    return SeriesCoefficients(c_x, beta, b)


def pdf_cascaded_power(x, spec: CascadeSpec, budget: SeriesBudget = SeriesBudget()):
    """Density of the cascaded kappa-mu power gain as a Meijer-G series.

    f(x) = sum_r (c_x(r) / 2) x^(b_1 - 1) G^{n,0}_{0,n}(theta x | b - b_1)
    """
    law = CascadeLaw.from_cascade(spec)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)):
        raise ValueError("cascaded density is evaluated for x > 0")
    n = law.depth

    def term(r):
        co = series_coefficients(law, r)
        if co.c_x == 0.0:
            return np.zeros_like(xa)
        g = meijer_g(MeijerGSpec(n, 0, 0, n, (), co.beta), law.theta * xa)
        return 0.5 * co.c_x * xa ** (co.shapes[0] - 1.0) * g

    res = truncated_nested_sum(term, n, budget)
    out = res.value
    return float(out[0]) if np.ndim(x) == 0 else out


# H-law helpers -------------------------------------------------------------


def _mrc_law(channel: CascadeSpec, branches: int):
    """Return ("single", CascadeLaw) or ("sum", CascadeLaw, branches)."""
    if branches == 1:
        return ("single", CascadeLaw.from_cascade(channel))
    if channel.level == 1:
        s = channel.stages[0]
        merged = KappaMuSpec(s.kappa, s.mu * branches, s.mean_power * branches)
        return ("single", CascadeLaw.from_cascade(CascadeSpec((merged,))))
    return ("sum", CascadeLaw.from_cascade(channel), branches)


def _pow(base, expo):
    # 0**0 == 1 for the binomial expansion
    return 1.0 if expo == 0 else base**expo


def _closed_form(law: CascadeLaw, lam, L_R, alpha1, alpha2, geom: GeometrySpec, budget):
    """delta = 1: 1 - OP = sum_r sum_i sum_j coef * E_r[H^p (B H + C)^-m]."""
    k = geom.order
    A = geom.area_factor
    B = A + lam * alpha1
    C = lam * alpha2
    theta = law.theta
    n = law.depth
    pairs = []
    for i in range(L_R):
        m = i + k
        base = (
            _pow(lam, i) / math.factorial(i)
            * math.exp(k * math.log(A) + math.lgamma(i + k) - math.lgamma(k) - m * math.log(C) - math.lgamma(m))
        )
        for j in range(i + 1):
            coef = base * math.comb(i, j) * _pow(alpha1, i - j) * _pow(alpha2, j)
            if coef != 0.0:
                pairs.append((m, m - j, coef))
    z = B / (C * theta)

    def term(r):
        lw = law.log_weight(r)
        if lw == -math.inf:
            return 0.0
        b = law.shapes_at(r)
        lgb = sum(math.lgamma(v) for v in b)
        total = 0.0
        for m, p, coef in pairs:
            g = meijer_g(MeijerGSpec(1, n + 1, n + 1, 1, (1.0 - m,) + tuple(1.0 - v - p for v in b), (0.0,)), z)
            total += coef * math.exp(lw - p * math.log(theta) - lgb) * g
        return total

    return truncated_nested_sum(term, n, budget)


def _pathloss_nodes(geom: GeometrySpec, step: float = 0.25):
    """Trapezoid nodes in log(u), u = A_e D^delta ~ Gamma(k, 1): (D, weight)."""
    k = geom.order
    u_lo = math.exp((math.log(1e-17) + math.lgamma(k + 1)) / k)
    u_hi = k + 45.0 + 8.0 * math.sqrt(k)
    y = np.arange(math.log(u_lo), math.log(u_hi) + step, step)
    u = np.exp(y)
    w = step * np.exp(k * y - u - math.lgamma(k))
    D = (u / geom.area_factor) ** (1.0 / geom.delta)
    return D, w


def _pathloss_quadrature(law: CascadeLaw, lam, L_R, alpha1, alpha2, geom: GeometrySpec, budget):
    """Any delta: E_D[ sum_i sum_j ... D^i e^{-lam alpha1 D} E_H[H^-j e^{-lam alpha2 D / H}] ]."""
    D, w = _pathloss_nodes(geom)
    theta = law.theta
    n = law.depth
    # outer factor per (j): sum_i over the path-loss nodes, independent of r
    outer = {}
    for i in range(L_R):
        for j in range(i + 1):
            fac = _pow(lam, i) / math.factorial(i) * math.comb(i, j) * _pow(alpha1, i - j) * _pow(alpha2, j)
            if fac == 0.0:
                continue
            vec = fac * w * D**i * np.exp(-lam * alpha1 * D)
            outer[j] = outer.get(j, 0.0) + vec
    zs = lam * alpha2 * D * theta

    def term(r):
        lw = law.log_weight(r)
        if lw == -math.inf:
            return 0.0
        b = law.shapes_at(r)
        lgb = sum(math.lgamma(v) for v in b)
        total = 0.0
        for j, vec in outer.items():
            g = meijer_g(MeijerGSpec(n + 1, 0, 0, n + 1, (), (0.0,) + tuple(v - j for v in b)), zs)
            total += math.exp(lw + j * math.log(theta) - lgb) * float(np.dot(vec, g))
        return total

    return truncated_nested_sum(term, n, budget)


def _branch_transform(law: CascadeLaw, q: int, sigma: np.ndarray, budget):
    """psi_q(sigma) = E[Z^q e^{-sigma Z}] for one cascade Z, on an array of sigma."""
    theta = law.theta
    n = law.depth
    out = np.empty_like(sigma)
    # short Taylor series in sigma where it is accurate to double precision
    nterms = 24
    moments = np.array([law.moment(q + l) for l in range(nterms + 1)])
    logfact = np.array([math.lgamma(l + 1) for l in range(nterms + 1)])
    tail = math.exp(math.log(1e-17) + math.log(moments[0]) + logfact[nterms] - math.log(moments[nterms]))
    small = sigma <= tail ** (1.0 / nterms)
    if np.any(small):
        s = sigma[small]
        ls = np.arange(nterms + 1)
        terms = (-s[:, None]) ** ls[None, :] * np.exp(np.log(moments)[None, :] - logfact[None, :])
        out[small] = terms.sum(axis=1)
    big = ~small
    converged, shells = True, 0
    if np.any(big):
        z = sigma[big] / theta

        def term(r):
            lw = law.log_weight(r)
            if lw == -math.inf:
                return np.zeros_like(z)
            b = law.shapes_at(r)
            pref = math.exp(lw - q * math.log(theta) - sum(math.lgamma(v) for v in b))
            return pref * meijer_g(MeijerGSpec(1, n, n, 1, tuple(1.0 - v - q for v in b), (0.0,)), z)

        res = truncated_nested_sum(term, n, budget)
        out[big] = res.value
        converged, shells = res.converged, res.shells_used
    return out, converged, shells


def _laplace_quadrature(law: CascadeLaw, branches, lam, L_R, alpha1, alpha2, geom: GeometrySpec, budget,
                        step: float = 0.25):
    """delta = 1 with H a sum of i.i.d. cascades.

    E[H^p (B H + C)^-m] = C^-m / Gamma(m) int tau^(m-1) e^-tau E[H^p e^{-(B/C) tau H}] dtau,
    and E[H^p e^{-s H}] expands multinomially into products of branch transforms.
    """
    k = geom.order
    A = geom.area_factor
    B = A + lam * alpha1
    C = lam * alpha2
    omega = B / C
    m_min = k
    m_max = L_R - 1 + k
    y_lo = math.log(1e-17) / m_min
    y_hi = math.log(m_max + 50.0)
    y = np.arange(y_lo, y_hi + step, step)
    tau = np.exp(y)
    sigma = omega * tau

    psi = {}
    converged, shells = True, 0
    for q in range(m_max + 1):
        psi[q], ok, sh = _branch_transform(law, q, sigma, budget)
        converged &= ok
        shells = max(shells, sh)

    def mixed_moment(p):
        total = 0.0
        for parts in compositions(p, branches):
            prod = float(multinomial(parts))
            for qi in parts:
                prod = prod * psi[qi]
            total = total + prod
        return total

    cache = {}
    value = 0.0
    for i in range(L_R):
        m = i + k
        base = _pow(lam, i) / math.factorial(i) * math.exp(k * math.log(A) + math.lgamma(i + k) - math.lgamma(k))
        for j in range(i + 1):
            coef = base * math.comb(i, j) * _pow(alpha1, i - j) * _pow(alpha2, j)
            if coef == 0.0:
                continue
            p = m - j
            if p not in cache:
                cache[p] = mixed_moment(p)
            integrand = tau**m * np.exp(-tau) * cache[p]
            n_val = math.exp(-m * math.log(C) - math.lgamma(m)) * step * float(integrand.sum())
            value += coef * n_val
    return value, converged, shells


def _success_probability(kind, lam, L_R, alpha1, alpha2, geom, budget, method):
    if kind[0] == "sum":
        if geom.delta != 1.0:
            raise UnsupportedParametersError(
                "analytic outage for MRC sums of multi-stage cascades needs delta = 1"
            )
        _, law, branches = kind
        val, ok, shells = _laplace_quadrature(law, branches, lam, L_R, alpha1, alpha2, geom, budget)
        return val, ok, shells, "laplace-quadrature"
    law = kind[1]
    if method == "auto":
        method = "closed-form" if geom.delta == 1.0 else "pathloss-quadrature"
    if method == "closed-form":
        if geom.delta != 1.0:
            raise UnsupportedParametersError("closed-form outage route needs delta = 1")
        res = _closed_form(law, lam, L_R, alpha1, alpha2, geom, budget)
    elif method == "pathloss-quadrature":
        res = _pathloss_quadrature(law, lam, L_R, alpha1, alpha2, geom, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(res.value), res.converged, res.shells_used, method


def _outage(p: SystemParams, kind, feasible, alpha1, alpha2, budget, method) -> OutageResult:
    if not feasible:
        return OutageResult(1.0, True, 0, False, "ceiling")
    if alpha1 == 0.0 and alpha2 == 0.0:
        return OutageResult(0.0, True, 0, True, "zero-threshold")
    success, ok, shells, used = _success_probability(
        kind, p.lambda_p, p.L_R, alpha1, alpha2, p.geometry, budget, method
    )
    value = 1.0 - success
    if -_RANGE_SLACK <= value <= 1.0 + _RANGE_SLACK:
        value = min(max(value, 0.0), 1.0)
    else:
        ok = False
    return OutageResult(value, ok, shells, True, used)


def outage_pu_closed_form(p: SystemParams, budget: SeriesBudget = SeriesBudget(),
                          method: str = "auto") -> OutageResult:
    """Outage probability of the PU link, P(R_p <= R_thp)."""
    dc = DerivedConstants.from_params(p)
    kind = ("single", CascadeLaw.from_cascade(p.rp_channel))
    return _outage(p, kind, dc.feasible_p, dc.c1, dc.c2, budget, method)


def outage_su_closed_form(p: SystemParams, budget: SeriesBudget = SeriesBudget(),
                          method: str = "auto") -> OutageResult:
    """Outage probability of the SU link, P(R_s <= R_ths)."""
    dc = DerivedConstants.from_params(p)
    kind = _mrc_law(p.rs_channel, p.L_S)
    return _outage(p, kind, dc.feasible_s, dc.d2, dc.d1, budget, method)


def throughput(p: SystemParams, op_p: float, op_s: float) -> Throughput:
    for name, v in (("op_p", op_p), ("op_s", op_s)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v!r} outside [0, 1]")
    tau_p = (1.0 - op_p) * p.R_thp * (1.0 - p.rho)
    tau_s = (1.0 - op_s) * p.R_ths * (1.0 - p.rho)
    return Throughput(tau_p, tau_s, tau_p + tau_s)


def energy_efficiency(p: SystemParams, tau: float) -> float:
    """tau / ((rho + nu_p + nu_s) P_T), bits per joule."""
    frac = p.rho + p.nu_p + p.nu_s
    if frac <= 0:
        raise ValueError("energy efficiency needs rho + nu_p + nu_s > 0")
    return tau / (frac * p.P_T)

