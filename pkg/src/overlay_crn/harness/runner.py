"""Evaluate a scenario point by point with the requested engines."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from ..analysis import energy_efficiency, outage_pu_closed_form, outage_su_closed_form, throughput
from ..optimize import solve_biconvex, solve_inner_fixed_af, solve_inner_fixed_rho, surrogate_rates
from ..simulate import estimate_outage
from .scenario import Scenario

__all__ = ["ResultRow", "evaluate_point", "run_scenario"]


@dataclass
class ResultRow:
    index: int
    sweep_name: str
    sweep: float
    series_name: Optional[str] = None
    series: Optional[float] = None
    values: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: str = ""


def _describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def _outage_values(s: Scenario, p, errors: list) -> dict:
    out = {}
    if "mc" in s.engines:
        try:
            est = estimate_outage(p, s.mc)
            tp = throughput(p, est.op_p_hat, est.op_s_hat)
            out.update(op_p_mc=est.op_p_hat, se_p_mc=est.se_p, op_s_mc=est.op_s_hat, se_s_mc=est.se_s,
                       tau_mc=tp.tau, ee_mc=energy_efficiency(p, tp.tau))
        except Exception as exc:  # recorded per row, the sweep continues
            errors.append("mc " + _describe(exc))
    if "analytic" in s.engines:
        for key, fn in (("op_p_analytic", outage_pu_closed_form), ("op_s_analytic", outage_su_closed_form)):
            try:
                res = fn(p, s.budget)
                out[key] = res.value
                if not res.converged:
                    errors.append(f"{key} not converged after {res.shells_used} shells")
            except Exception as exc:
                errors.append(f"{key} " + _describe(exc))
        if "op_p_analytic" in out and "op_s_analytic" in out:
            tp = throughput(p, out["op_p_analytic"], out["op_s_analytic"])
            out.update(tau_analytic=tp.tau, ee_analytic=energy_efficiency(p, tp.tau))
    return out


def _optimize_values(s: Scenario, p, errors: list) -> dict:
    cfg = s.optimizer
    out = {}
    try:
        joint = solve_biconvex(p, cfg)
        out.update(rho_joint=joint.rho_star, af_joint=joint.af_star, rs_joint=joint.objective,
                   rp_joint=joint.pu_rate, feasible_joint=int(joint.feasible))
        rho_only = solve_inner_fixed_af(p, p.A_f, replace(cfg, rho0=p.rho))
        rs, rp = surrogate_rates(p, rho_only.x_star, p.A_f)
        out.update(rho_rho_only=rho_only.x_star, rs_rho_only=rs, rp_rho_only=rp)
        af_only = solve_inner_fixed_rho(p, p.rho, replace(cfg, af0=p.A_f))
        rs, rp = surrogate_rates(p, p.rho, af_only.x_star)
        out.update(af_af_only=af_only.x_star, rs_af_only=rs, rp_af_only=rp)
        rs, rp = surrogate_rates(p, p.rho, p.A_f)
        out.update(rs_fixed=rs, rp_fixed=rp)
    except Exception as exc:
        errors.append("optimize " + _describe(exc))
    return out


def evaluate_point(s: Scenario, index: int, series, sweep, flat: dict) -> ResultRow:
    t0 = time.perf_counter()
    row = ResultRow(index, s.sweep.variable, sweep, s.series.variable if s.series else None, series)
    errors: list[str] = []
    try:
        p = s.system_params(flat)
        row.values = _optimize_values(s, p, errors) if s.task == "optimize" else _outage_values(s, p, errors)
    except Exception as exc:
        errors.append(_describe(exc))
    row.error = "; ".join(errors)
    row.wall_time = time.perf_counter() - t0
    return row


def run_scenario(s: Scenario, workers: int = 1) -> list[ResultRow]:
    """All sweep points, ordered by (series, sweep) index whatever the completion order."""
    points = list(s.points())
    if workers <= 1:
        return [evaluate_point(s, i, *pt) for i, pt in enumerate(points)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(evaluate_point, s, i, *pt) for i, pt in enumerate(points)]
        rows = [f.result() for f in futures]
    rows.sort(key=lambda r: r.index)
    return rows
