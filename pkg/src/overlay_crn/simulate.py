"""Monte-Carlo estimation of outage, throughput and energy efficiency.

Trials are grouped in fixed blocks of ``BLOCK`` draws.  Every random variable
of a block (and every MRC branch and cascade stage) has its own counter-based
substream keyed by (seed, block, variable, branch, stage), so:

* estimates do not depend on ``batch`` or on the number of workers;
* sweeps with a shared seed use common random numbers, and adding an antenna
  or a cascade stage only appends draws, leaving the others untouched.

Outage counts are integers, so the reduction order cannot change results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import Throughput, energy_efficiency, throughput
from .fading import CascadeSpec, sample_kappa_mu_power
from .linkmodel import ChannelRealization, DerivedConstants, SystemParams, rate, sinr_pu, sinr_su

__all__ = [
    "BLOCK",
    "McConfig",
    "McEstimate",
    "McMetrics",
    "TrialOutcome",
    "draw_channels",
    "run_trial",
    "estimate_outage",
    "estimate_metrics",
]

BLOCK = 8192

# substream tags
_PATHLOSS, _PR, _RP, _RS = 0, 1, 2, 3


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 0
    batch: int = 65536
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be an integer >= 1, got {self.trials!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise ValueError(f"batch must be an integer >= 1, got {self.batch!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be an integer >= 1, got {self.workers!r}")


@dataclass(frozen=True)
class McEstimate:
    op_p_hat: float
    op_s_hat: float
    se_p: float
    se_s: float
    trials: int
    outages_p: int = 0
    outages_s: int = 0


@dataclass(frozen=True)
class McMetrics:
    tau: float
    ee: float
    throughput: Throughput
    estimate: McEstimate


@dataclass(frozen=True)
class TrialOutcome:
    gamma_p: float
    gamma_s: float
    r_p: float
    r_s: float


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _cascade_draw(spec: CascadeSpec, seed: int, key: tuple, size: int) -> np.ndarray:
    out = np.ones(size)
    for stage_idx, stage in enumerate(spec.stages):
        out *= sample_kappa_mu_power(stage, _rng(seed, *key, stage_idx), size)
    return out


def draw_channels(p: SystemParams, seed: int, block: int, size: int) -> ChannelRealization:
    """Channel gains for one block of ``size`` trials."""
    geom = p.geometry
    y = _rng(seed, block, _PATHLOSS).standard_gamma(geom.order, size) / geom.area_factor
    d_alpha = y ** (1.0 / geom.delta)
    G_PR = np.zeros(size)
    for br in range(p.L_R):
        G_PR += _rng(seed, block, _PR, br).standard_exponential(size)
    G_PR /= p.lambda_p
    g_RP = _cascade_draw(p.rp_channel, seed, (block, _RP, 0), size)
    G_RS = np.zeros(size)
    for br in range(p.L_S):
        G_RS += _cascade_draw(p.rs_channel, seed, (block, _RS, br), size)
    return ChannelRealization(G_PR, g_RP, G_RS, d_alpha)


def _is_outage(r, threshold: float) -> np.ndarray:
    # a zero target can never be missed
    if threshold <= 0:
        return np.zeros(np.shape(r), dtype=bool)
    return np.asarray(r) <= threshold


def run_trial(p: SystemParams, rng: np.random.Generator) -> TrialOutcome:
    """One network draw: sample the channels, return both SINRs and rates."""
    seed = int(rng.integers(0, 2**63))
    ch = draw_channels(p, seed, 0, 1)
    dc = DerivedConstants.from_params(p)
    gp = float(sinr_pu(dc, ch, p.N_0)[0])
    gs = float(sinr_su(dc, ch, p.N_0)[0])
    return TrialOutcome(gp, gs, rate(gp, p.rho, p.T), rate(gs, p.rho, p.T))


def _count_block(p: SystemParams, dc: DerivedConstants, seed: int, block: int, size: int):
    ch = draw_channels(p, seed, block, size)
    r_p = rate(sinr_pu(dc, ch, p.N_0), p.rho, p.T)
    r_s = rate(sinr_su(dc, ch, p.N_0), p.rho, p.T)
    return int(np.count_nonzero(_is_outage(r_p, p.R_thp))), int(np.count_nonzero(_is_outage(r_s, p.R_ths)))


def _count_range(p, dc, seed, blocks, trials):
    cp = cs = 0
    for b in blocks:
        size = min(BLOCK, trials - b * BLOCK)
        a, s = _count_block(p, dc, seed, b, size)
        cp += a
        cs += s
    return cp, cs


def _se(phat: float, n: int) -> float:
    return math.sqrt(phat * (1.0 - phat) / n)


def estimate_outage(p: SystemParams, cfg: McConfig, executor: Optional[ThreadPoolExecutor] = None) -> McEstimate:
    """Fraction of trials with R_p <= R_thp and R_s <= R_ths."""
    dc = DerivedConstants.from_params(p)
    n_blocks = -(-cfg.trials // BLOCK)
    per_chunk = max(1, cfg.batch // BLOCK)
    chunks = [range(i, min(i + per_chunk, n_blocks)) for i in range(0, n_blocks, per_chunk)]
    if cfg.workers == 1 and executor is None:
        parts = [_count_range(p, dc, cfg.seed, c, cfg.trials) for c in chunks]
    else:
        own = executor is None
        pool = executor or ThreadPoolExecutor(max_workers=cfg.workers)
        try:
            parts = list(pool.map(lambda c: _count_range(p, dc, cfg.seed, c, cfg.trials), chunks))
        finally:
            if own:
                pool.shutdown()
    cp = sum(a for a, _ in parts)
    cs = sum(b for _, b in parts)
    n = cfg.trials
    op_p, op_s = cp / n, cs / n
    return McEstimate(op_p, op_s, _se(op_p, n), _se(op_s, n), n, cp, cs)


def estimate_metrics(p: SystemParams, cfg: McConfig) -> McMetrics:
    """Throughput and energy efficiency from MC outage estimates."""
    est = estimate_outage(p, cfg)
    tp = throughput(p, est.op_p_hat, est.op_s_hat)
    return McMetrics(tp.tau, energy_efficiency(p, tp.tau), tp, est)
