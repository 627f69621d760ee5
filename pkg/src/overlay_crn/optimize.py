"""Alternating maximization of the SU rate over (rho, A_f) with a PU-rate floor.

    maximize   R_s(rho, A_f)
    subject to R_p(rho, A_f) >= R_pt,  margin <= rho, A_f <= 1 - margin

Each block (A_f with rho fixed, then rho with A_f fixed) maximizes the
augmented Lagrangian

    Phi = R_s - (1 / 2c) * (max(0, Y3 + c g)^2 - Y3^2),   g = R_pt - R_p

by projected gradient ascent on finite-difference gradients, and the
multiplier Y3 is updated by dual ascent Y3 <- max(0, Y3 + c g).  The
multiplier is shared by both blocks, so the iteration can move along an
active rate constraint instead of stalling on it.  Box constraints are kept
by projection; their multipliers Y1, Y2 are read off the projected gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .analysis import throughput
from .geometry import mean_pathloss
from .linkmodel import SystemParams
from .simulate import McConfig, estimate_outage

__all__ = [
    "OptConfig",
    "OptResult",
    "InnerResult",
    "surrogate_rates",
    "objective",
    "pu_rate",
    "fd_gradient",
    "solve_inner_fixed_rho",
    "solve_inner_fixed_af",
    "solve_biconvex",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_PENALTY = 1e6


@dataclass(frozen=True)
class OptConfig:
    rho0: float = 0.5
    af0: float = 0.5
    step0: float = 0.05
    fd_h: float = 1e-4
    tol_obj: float = 1e-6
    tol_kkt: float = 1e-4
    max_outer: int = 500
    max_inner: int = 200
    box_margin: float = 1e-3
    penalty: float = 20.0
    mode: str = "surrogate"
    mc: Optional[McConfig] = None

    def __post_init__(self):
        for name in ("rho0", "af0"):
            v = getattr(self, name)
            if not self.box_margin <= v <= 1.0 - self.box_margin:
                raise ValueError(f"{name}={v!r} must lie inside [box_margin, 1 - box_margin]")
        for name in ("step0", "fd_h", "tol_obj", "tol_kkt", "penalty"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.box_margin < 0.5:
            raise ValueError("box_margin must lie in (0, 0.5)")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.mode not in ("surrogate", "mc"):
            raise ValueError(f"mode must be 'surrogate' or 'mc', got {self.mode!r}")

    @property
    def lo(self) -> float:
        return self.box_margin

    @property
    def hi(self) -> float:
        return 1.0 - self.box_margin


@dataclass(frozen=True)
class InnerResult:
    x_star: float
    duals: tuple
    objective: float
    converged: bool
    iterations: int
    method: str


@dataclass(frozen=True)
class OptResult:
    rho_star: float
    af_star: float
    objective: float
    duals: tuple
    outer_iters: int
    converged: bool
    constraint_residual: float
    feasible: bool = True
    history: tuple = field(default=(), repr=False)
    pu_rate: float = math.nan


# objective --------------------------------------------------------------


def _mean_state(p: SystemParams):
    """(G_PR, g_RP, G_RS, d^alpha) at their means."""
    return (
        p.L_R / p.lambda_p,
        p.rp_channel.mean,
        p.L_S * p.rs_channel.mean,
        mean_pathloss(p.geometry),
    )


def surrogate_rates(p: SystemParams, rho, af):
    """(R_s, R_p) at the mean channel state; accepts arrays for rho and af."""
    rho = np.asarray(rho, dtype=float)
    af = np.asarray(af, dtype=float)
    G, g, S, D = _mean_state(p)
    u = rho * p.eta / (1.0 - rho) * p.P_T
    x_p = g * G / D
    x_s = S * G / D
    # SINRs of the linkmodel with a..w expanded; P_T cancels in b/e via u
    a = (1.0 - p.nu_p) * af * u
    c = (1.0 - af) * u
    b = p.N_0 * af * u / p.P_T
    q = (1.0 - p.nu_s) * (1.0 - af) * u
    w = af * u
    gp = a * x_p / (b * g + c * x_p + p.N_0)
    gs = q * x_s / (b * S + w * x_s + p.N_0)
    slot = (1.0 - rho) * p.T
    rs = slot * np.log2(1.0 + gs)
    rp = slot * np.log2(1.0 + gp)
    if rs.ndim == 0:
        return float(rs), float(rp)
    return rs, rp


def _check_interior(rho, af):
    if not (0.0 < rho < 1.0 and 0.0 < af < 1.0):
        raise ValueError(f"(rho, A_f)=({rho!r}, {af!r}) must be interior to (0, 1)^2")


def _mc_rates(p: SystemParams, rho: float, af: float, mc: McConfig):
    q = replace(p, rho=float(rho), A_f=float(af))
    est = estimate_outage(q, mc)
    tp = throughput(q, est.op_p_hat, est.op_s_hat)
    return tp.tau_s, tp.tau_p


def _rates(p, rho, af, mode="surrogate", mc=None):
    if mode == "surrogate":
        return surrogate_rates(p, rho, af)
    return _mc_rates(p, rho, af, mc or McConfig(trials=100_000))


def objective(p: SystemParams, rho: float, af: float, mode: str = "surrogate",
              mc: Optional[McConfig] = None) -> float:
    """SU rate at (rho, A_f).

    ``surrogate`` evaluates R_s at the mean channel state; ``mc`` returns the
    Monte-Carlo SU throughput under common random numbers.
    """
    _check_interior(rho, af)
    return _rates(p, rho, af, mode, mc)[0]


def pu_rate(p: SystemParams, rho: float, af: float, mode: str = "surrogate",
            mc: Optional[McConfig] = None) -> float:
    _check_interior(rho, af)
    return _rates(p, rho, af, mode, mc)[1]


def fd_gradient(fun: Callable[[float], float], x: float, h: float, lo: float = -math.inf,
                hi: float = math.inf) -> float:
    """Central difference, falling back to one-sided next to a bound."""
    left, right = x - h, x + h
    if left < lo:
        return (fun(right) - fun(x)) / h
    if right > hi:
        return (fun(x) - fun(left)) / h
    return (fun(right) - fun(left)) / (2.0 * h)


# one-dimensional solver ---------------------------------------------------


class _Block:
    """Augmented Lagrangian along one coordinate."""

    def __init__(self, p, cfg: OptConfig, rates_at: Callable[[float], tuple], penalty: Optional[float] = None):
        self.p = p
        self.cfg = cfg
        self.rates_at = rates_at
        self.penalty = cfg.penalty if penalty is None else penalty
        self.cache = {}

    def rates(self, x):
        hit = self.cache.get(x)
        if hit is None:
            hit = self.rates_at(x)
            self.cache[x] = hit
        return hit

    def slack(self, x):
        return self.p.R_pt - self.rates(x)[1]

    def phi(self, x, y3):
        rs, rp = self.rates(x)
        c = self.penalty
        t = max(0.0, y3 + c * (self.p.R_pt - rp))
        return rs - (t * t - y3 * y3) / (2.0 * c)

    def lagrangian_grad(self, x, y3):
        cfg = self.cfg
        return fd_gradient(lambda z: self.rates(z)[0] + y3 * self.rates(z)[1], x, cfg.fd_h, cfg.lo, cfg.hi)


def _concave_on_scan(values: np.ndarray) -> bool:
    d2 = np.diff(values, 2)
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(np.all(d2 <= 1e-10 * scale))


def _golden(fun, lo, hi, tol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    it = 0
    while b - a > tol and it < 200:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
        it += 1
    return (c, it) if fc >= fd else (d, it)


def _maximize_block(block: _Block, x0: float, y3: float):
    """Maximize Phi(x; y3) on the box. Returns (x, iterations, converged, method)."""
    cfg = block.cfg
    lo, hi = cfg.lo, cfg.hi
    fun = lambda z: block.phi(z, y3)  # noqa: E731
    scan = np.linspace(lo, hi, 11)
    vals = np.array([fun(float(s)) for s in scan])
    if not _concave_on_scan(vals):
        i = int(np.argmax(vals))
        left, right = float(scan[max(i - 1, 0)]), float(scan[min(i + 1, 10)])
        x, it = _golden(fun, left, right, 1e-9)
        if fun(x0) > fun(x):
            x = x0
        return x, it, True, "golden"

    x, fx, step = x0, fun(x0), cfg.step0
    for it in range(1, cfg.max_inner + 1):
        g = fd_gradient(fun, x, cfg.fd_h, lo, hi)
        moved = False
        for _ in range(60):
            xn = min(max(x + step * g, lo), hi)
            fn = fun(xn)
            if xn != x and fn >= fx + 1e-4 * g * (xn - x):
                moved = True
                break
            step *= 0.5
        if not moved:
            return x, it, True, "gradient"
        gain = fn - fx
        x, fx = xn, fn
        step *= 2.0
        if gain < cfg.tol_obj * 1e-3:
            return x, it, True, "gradient"
    return x, cfg.max_inner, False, "gradient"


def _box_duals(grad: float, x: float, cfg: OptConfig, tol: float = 1e-9):
    y1 = max(0.0, grad) if x >= cfg.hi - tol else 0.0
    y2 = max(0.0, -grad) if x <= cfg.lo + tol else 0.0
    return y1, y2


def _constraint_measure(g: float, y3: float, c: float) -> float:
    return abs(max(g, -y3 / c))


def _solve_block(block: _Block, x0: float, cfg: OptConfig, y3: float = 0.0):
    """Multiplier loop for a single coordinate."""
    x = x0
    total_it = 0
    method = "gradient"
    converged = False
    measure = math.inf
    for _ in range(cfg.max_inner):
        c = block.penalty
        x, it, ok, method = _maximize_block(block, x, y3)
        total_it += it
        g = block.slack(x)
        y3_new = max(0.0, y3 + c * g)
        done = ok and g <= cfg.tol_kkt and abs(y3_new * g) <= cfg.tol_kkt and abs(y3_new - y3) <= cfg.tol_kkt
        y3 = y3_new
        if done:
            converged = True
            break
        block.penalty = _next_penalty(c, _constraint_measure(g, y3, c), measure)
        measure = min(measure, _constraint_measure(g, y3, c))
    if block.p.R_pt <= 0:
        y3 = 0.0
    grad = block.lagrangian_grad(x, y3)
    y1, y2 = _box_duals(grad, x, cfg)
    return InnerResult(x, (y1, y2, y3), block.rates(x)[0], converged, total_it, method)


def _next_penalty(c: float, measure: float, previous: float) -> float:
    """Grow the penalty when the constraint measure stalls."""
    if measure > 0.25 * previous:
        return min(c * 10.0, _MAX_PENALTY)
    return c


def _rates_fn(p, cfg):
    return lambda rho, af: _rates(p, rho, af, cfg.mode, cfg.mc)


def solve_inner_fixed_rho(p: SystemParams, rho: float, cfg: OptConfig = OptConfig(),
                          af_init: Optional[float] = None) -> InnerResult:
    """Best A_f for fixed rho under the PU-rate floor."""
    _check_interior(rho, cfg.af0)
    rates = _rates_fn(p, cfg)
    block = _Block(p, cfg, lambda af: rates(rho, af))
    return _solve_block(block, cfg.af0 if af_init is None else af_init, cfg)


def solve_inner_fixed_af(p: SystemParams, af: float, cfg: OptConfig = OptConfig(),
                         rho_init: Optional[float] = None) -> InnerResult:
    """Best rho for fixed A_f under the PU-rate floor."""
    _check_interior(cfg.rho0, af)
    rates = _rates_fn(p, cfg)
    block = _Block(p, cfg, lambda rho: rates(rho, af))
    return _solve_block(block, cfg.rho0 if rho_init is None else rho_init, cfg)


def _max_pu_rate(p: SystemParams, cfg: OptConfig) -> float:
    grid = np.linspace(cfg.lo, cfg.hi, 41)
    if cfg.mode == "surrogate":
        R, A = np.meshgrid(grid, grid, indexing="ij")
        return float(np.max(surrogate_rates(p, R, A)[1]))
    rates = _rates_fn(p, cfg)
    return max(rates(float(r), float(a))[1] for r in grid[::4] for a in grid[::4])


def solve_biconvex(p: SystemParams, cfg: OptConfig = OptConfig()) -> OptResult:
    """Alternate A_f and rho blocks with a shared PU-rate multiplier.

    The returned point is the best feasible iterate; ``history`` holds the
    incumbent objective after every outer iteration and never decreases.
    """
    rates = _rates_fn(p, cfg)
    c = cfg.penalty
    tol = cfg.tol_kkt

    def feasible(rp):
        return rp >= p.R_pt - tol

    rho, af = cfg.rho0, cfg.af0
    rs, rp = rates(rho, af)
    best = (rs, rho, af, rp) if feasible(rp) else None
    history = []
    y3 = 0.0
    prev_phi = -math.inf
    measure = math.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_outer + 1):
        af_block = _Block(p, cfg, lambda a, r=rho: rates(r, a), c)
        af, _, ok_a, _ = _maximize_block(af_block, af, y3)
        rho_block = _Block(p, cfg, lambda r, a=af: rates(r, a), c)
        rho, _, ok_r, _ = _maximize_block(rho_block, rho, y3)
        rs, rp = rho_block.rates(rho)
        phi = rho_block.phi(rho, y3)
        g = p.R_pt - rp
        y3_new = max(0.0, y3 + c * g)
        if feasible(rp) and (best is None or rs >= best[0]):
            best = (rs, rho, af, rp)
        history.append(best[0] if best is not None else -math.inf)
        stalled = abs(phi - prev_phi) < cfg.tol_obj
        kkt = g <= tol and abs(y3_new * g) <= tol and abs(y3_new - y3) <= tol
        y3 = y3_new
        prev_phi = phi
        if ok_a and ok_r and stalled and kkt:
            converged = True
            break
        m = _constraint_measure(g, y3, c)
        c_next = _next_penalty(c, m, measure)
        measure = min(measure, m)
        if c_next != c:
            c = c_next
            prev_phi = -math.inf

    if best is None:
        if _max_pu_rate(p, cfg) < p.R_pt - tol:
            return OptResult(math.nan, math.nan, math.nan, (0.0, 0.0, 0.0), it, False,
                             math.inf, feasible=False, history=tuple(history))
        return OptResult(rho, af, rs, (0.0, 0.0, y3), it, False, max(0.0, p.R_pt - rp),
                         feasible=False, history=tuple(history), pu_rate=rp)

    rs, rho_s, af_s, rp = best
    if p.R_pt <= 0:
        y3 = 0.0
    # box multipliers of the final rho block, as in the last step of the alternation
    rho_block = _Block(p, cfg, lambda r: rates(r, af_s))
    y1, y2 = _box_duals(rho_block.lagrangian_grad(rho_s, y3), rho_s, cfg)
    duals = (y1, y2, y3)
    return OptResult(rho_s, af_s, rs, duals, it, converged, max(0.0, p.R_pt - rp),
                     feasible=True, history=tuple(history), pu_rate=rp)
