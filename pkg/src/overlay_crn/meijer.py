"""Numerical Meijer G-function and truncation of nested infinite series.

The G-function is evaluated from its Mellin-Barnes integral

    G(x) = 1/(2 pi i) * int  prod Gamma(b_k - s) prod Gamma(1 - a_j + s)
                             / (prod Gamma(1 - b_k + s) prod Gamma(a_j - s)) x^s ds

along a vertical line Re(s) = c that separates the poles of the two
numerator families.  The abscissa c is placed at the real saddle point of
the integrand inside the admissible strip, so the integrand is peaked at the
real axis and the trapezoidal sum does not suffer from cancellation.  The
trapezoidal step is halved until successive sums agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import special

__all__ = [
    "MeijerGError",
    "UnsupportedParametersError",
    "ConvergenceError",
    "SeriesEvaluationError",
    "MeijerGSpec",
    "SeriesBudget",
    "NestedSumResult",
    "meijer_g",
    "truncated_nested_sum",
    "index_shell",
]


class MeijerGError(ArithmeticError):
    """Base class for Meijer-G evaluation failures."""


class UnsupportedParametersError(MeijerGError):
    """The parameter set is outside the class this evaluator handles."""


class ConvergenceError(MeijerGError):
    """The contour quadrature or a series did not reach its tolerance."""


class SeriesEvaluationError(MeijerGError):
    """A series term evaluated to a non-finite number."""

    def __init__(self, index, value):
        super().__init__(f"non-finite series term {value!r} at index {tuple(index)}")
        self.index = tuple(index)
        self.value = value


def _is_positive_integer(v: float, tol: float = 1e-12) -> bool:
    r = round(v)
    return r >= 1 and abs(v - r) <= tol


@dataclass(frozen=True)
class MeijerGSpec:
    """Order (m, n, p, q) and parameter vectors of one G^{m,n}_{p,q}."""

    m: int
    n: int
    p: int
    q: int
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if min(self.m, self.n, self.p, self.q) < 0:
            raise UnsupportedParametersError("orders must be non-negative")
        if len(a) != self.p or len(b) != self.q:
            raise UnsupportedParametersError(
                f"expected {self.p} a-parameters and {self.q} b-parameters, "
                f"got {len(a)} and {len(b)}"
            )
        if self.m > self.q or self.n > self.p:
            raise UnsupportedParametersError("need 0 <= m <= q and 0 <= n <= p")
        if not all(math.isfinite(v) for v in a + b):
            raise UnsupportedParametersError("parameters must be finite")
        for aj in a[: self.n]:
            for bk in b[: self.m]:
                if _is_positive_integer(aj - bk):
                    raise UnsupportedParametersError(
                        f"pole collision: a - b = {aj - bk:g} is a positive integer"
                    )

    @property
    def decay_rate(self) -> float:
        """Exponential decay rate (in units of pi) of the integrand along Im(s)."""
        return self.m + self.n - 0.5 * (self.p + self.q)

    def strip(self) -> tuple[float, float]:
        """Open interval of Re(s) separating left poles from right poles."""
        left = max((aj - 1.0 for aj in self.a[: self.n]), default=-math.inf)
        right = min(self.b[: self.m], default=math.inf)
        return left, right

    def _real_log_kernel(self, c: np.ndarray) -> np.ndarray:
        # log|Phi(c)| on the real axis
        out = np.zeros_like(c)
        for bk in self.b[: self.m]:
            out += special.gammaln(bk - c)
        for aj in self.a[: self.n]:
            out += special.gammaln(1.0 - aj + c)
        for bk in self.b[self.m :]:
            out -= special.gammaln(1.0 - bk + c)
        for aj in self.a[self.n :]:
            out -= special.gammaln(aj - c)
        return out

    def _log_kernel(self, s: np.ndarray) -> np.ndarray:
        out = np.zeros_like(s)
        for bk in self.b[: self.m]:
            out += special.loggamma(bk - s)
        for aj in self.a[: self.n]:
            out += special.loggamma(1.0 - aj + s)
        for bk in self.b[self.m :]:
            out -= special.loggamma(1.0 - bk + s)
        for aj in self.a[self.n :]:
            out -= special.loggamma(aj - s)
        return out


def _fast_path(spec: MeijerGSpec, x: np.ndarray):
    key = (spec.m, spec.n, spec.p, spec.q)
    if key == (1, 0, 0, 1):
        (b,) = spec.b
        return np.exp(b * np.log(x) - x)
    if key == (1, 1, 1, 1):
        (a,), (b,) = spec.a, spec.b
        return special.gamma(1.0 - a + b) * x**b * (1.0 + x) ** (a - b - 1.0)
    if key == (2, 0, 0, 2):
        b1, b2 = spec.b
        return 2.0 * x ** (0.5 * (b1 + b2)) * special.kv(b1 - b2, 2.0 * np.sqrt(x))
    return None


def meijer_g(spec: MeijerGSpec, x, method: str = "auto", rtol: float = 1e-11):
    """Evaluate G^{m,n}_{p,q}(x | a; b) for real x > 0.

    ``x`` may be a scalar or an array.  ``method="auto"`` uses closed-form
    reductions for G^{1,0}_{0,1}, G^{1,1}_{1,1} and G^{2,0}_{0,2} and the
    Mellin-Barnes contour otherwise; ``method="contour"`` forces the contour.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if np.any(~(xa > 0)) or not np.all(np.isfinite(xa)):
        raise ValueError("meijer_g requires finite x > 0")
    if method not in ("auto", "contour"):
        raise ValueError(f"unknown method {method!r}")

    out = _fast_path(spec, xa) if method == "auto" else None
    if out is None:
        out = _contour(spec, xa.ravel(), rtol).reshape(xa.shape)
    return float(out[0]) if scalar else out


# Contour quadrature --------------------------------------------------------

_TAIL_LOG = -48.0  # integrand magnitude, relative to its peak, that ends the tail
_MAX_HALVINGS = 14
_MAX_WORK = 3_000_000  # complex nodes per vectorized block


def _saddle(spec, logx, lo, hi, iters=60):
    """Vectorized golden-section minimization of the real log-integrand."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(c):
        return spec._real_log_kernel(c) + c * logx

    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        c1 = b - invphi * (b - a)
        c2 = a + invphi * (b - a)
        keep_left = f(c1) < f(c2)
        b = np.where(keep_left, c2, b)
        a = np.where(keep_left, a, c1)
    return 0.5 * (a + b)


def _contour(spec: MeijerGSpec, x: np.ndarray, rtol: float) -> np.ndarray:
    if spec.decay_rate <= 0:
        raise ConvergenceError(
            f"Mellin-Barnes integrand of G^{{{spec.m},{spec.n}}}_{{{spec.p},{spec.q}}} "
            "does not decay along the contour"
        )
    left, right = spec.strip()
    if not left < right:
        raise UnsupportedParametersError(
            "poles of the two Gamma families cannot be separated by a vertical line"
        )
    logx = np.log(x)
    k_num = max(1, spec.m + spec.n)
    reach = 8.0 + 4.0 * np.exp(np.minimum(np.abs(logx) / k_num, math.log(2.5e3)))
    if math.isfinite(left) and math.isfinite(right):
        margin = min(0.25, 0.25 * (right - left))
        lo = np.full_like(x, left + margin)
        hi = np.full_like(x, right - margin)
    elif math.isfinite(right):
        lo, hi = right - reach, np.full_like(x, right - 0.25)
    elif math.isfinite(left):
        lo, hi = np.full_like(x, left + 0.25), left + reach
    else:
        lo, hi = -reach, reach
    c = _saddle(spec, logx, lo, hi)
    f0 = spec._real_log_kernel(c) + c * logx

    # curvature at the saddle sets the Gaussian width of the integrand
    eps = 1e-3 * np.maximum(1.0, np.abs(c))
    fpp = (
        spec._real_log_kernel(c + eps) + spec._real_log_kernel(c - eps) - 2.0 * spec._real_log_kernel(c)
    ) / eps**2
    width = 1.0 / np.sqrt(np.maximum(fpp, 1e-12))
    dist = np.minimum(c - left, right - c)
    h0 = np.minimum.reduce([np.full_like(x, 0.5), 0.5 * dist, 0.5 * width])

    tgrid = 0.25 * 2.0 ** np.arange(0, 17)
    mag = np.real(spec._log_kernel(c[:, None] + 1j * tgrid[None, :])) + c[:, None] * logx[:, None]
    mag -= f0[:, None]
    below = mag < _TAIL_LOG
    # first grid point after which the integrand stays below the tail level
    tail_ok = np.flip(np.cumprod(np.flip(below, axis=1), axis=1), axis=1).astype(bool)
    if not np.all(tail_ok[:, -1]):
        raise ConvergenceError("contour integrand did not decay within |Im s| < 16384")
    tmax = tgrid[np.argmax(tail_ok, axis=1)]

    out = np.empty_like(x)
    order = np.argsort(h0)
    # group points with similar step so one slow point does not set the step for all
    start = 0
    while start < x.size:
        idx = order[start : start + max(1, min(x.size - start, 256))]
        h = float(h0[idx].min())
        k = int(math.ceil(float(tmax[idx].max()) / h))
        while idx.size > 1 and idx.size * k > _MAX_WORK:
            idx = idx[: idx.size // 2]
            h = float(h0[idx].min())
            k = int(math.ceil(float(tmax[idx].max()) / h))
        out[idx] = _trapezoid(spec, c[idx], logx[idx], f0[idx], h, k, rtol)
        start += idx.size
    return out


def _trapezoid(spec, c, logx, f0, h, k, rtol):
    def integrand(t):
        s = c[:, None] + 1j * t[None, :]
        val = spec._log_kernel(s) + s * logx[:, None] - f0[:, None]
        return np.real(np.exp(val))

    t = h * np.arange(k + 1)
    vals = integrand(t)
    total = vals[:, 0] * 0.5 + vals[:, 1:].sum(axis=1)
    est = h * total
    for _ in range(_MAX_HALVINGS):
        h *= 0.5
        k *= 2
        t_new = h * np.arange(1, k + 1, 2)
        total = total + integrand(t_new).sum(axis=1)
        new = h * total
        err = np.abs(new - est)
        est = new
        if np.all(err <= rtol * np.abs(new) + 1e-15):
            return np.exp(f0) * est / math.pi
        if k * c.size > 8 * _MAX_WORK:
            break
    raise ConvergenceError("trapezoidal contour sum did not converge")


# Nested series -------------------------------------------------------------


@dataclass(frozen=True)
class SeriesBudget:
    """Truncation controls for nested series."""

    rel_tol: float = 1e-8
    max_index_per_sum: int = 60

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_index_per_sum < 1:
            raise ValueError("max_index_per_sum must be at least 1")


@dataclass(frozen=True)
class NestedSumResult:
    value: object
    converged: bool
    terms_used: int
    shells_used: int


def index_shell(total: int, depth: int, cap: int) -> Iterator[tuple[int, ...]]:
    """All non-negative index vectors of length ``depth`` summing to ``total``."""
    if depth == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap), -1, -1):
        for rest in index_shell(total - first, depth - 1, cap):
            yield (first,) + rest


def truncated_nested_sum(
    term: Callable[[tuple[int, ...]], object],
    depth: int,
    budget: SeriesBudget = SeriesBudget(),
    quiet_shells: int = 3,
) -> NestedSumResult:
    """Sum ``term(r)`` over all r in N^depth, shell by shell in total order.

    The sum stops once ``quiet_shells`` consecutive shells each change the
    partial sum by at most ``rel_tol`` relative to it.  Terms may be arrays;
    every component must then pass the test.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    cap = budget.max_index_per_sum
    partial = 0.0
    quiet = 0
    used = 0
    for total in range(depth * cap + 1):
        contrib = 0.0
        for idx in index_shell(total, depth, cap):
            v = term(idx)
            used += 1
            if not np.all(np.isfinite(v)):
                raise SeriesEvaluationError(idx, v)
            contrib = contrib + v
        partial = partial + contrib
        if np.all(np.abs(contrib) <= budget.rel_tol * np.abs(partial)):
            quiet += 1
            if quiet >= quiet_shells:
                return NestedSumResult(partial, True, used, total + 1)
        else:
            quiet = 0
    return NestedSumResult(partial, False, used, depth * cap + 1)


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered splits of ``total`` into ``parts`` non-negative integers."""
    return index_shell(total, parts, total)


def multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out

