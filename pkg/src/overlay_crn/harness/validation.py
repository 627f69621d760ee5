"""Cross-engine validation grid: analytic outage against Monte Carlo.

40 points: cascade level n_p = n_s in {1, 2}, kappa in {0, 1}, mu = 1,
relay order k in {1, 2} and P_T in {0, 5, 10, 15, 20} dB.  The PU outage
uses the fig3 parameters with L_R = 2, the SU outage the fig4 parameters
with L_S = 2.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from ..analysis import outage_pu_closed_form, outage_su_closed_form
from ..meijer import SeriesBudget
from ..simulate import McConfig, estimate_outage
from .presets import CAPTIONS
from .runner import ResultRow
from .scenario import build_params

__all__ = ["GRID_LEVELS", "GRID_KAPPAS", "GRID_ORDERS", "GRID_PT_DB", "validation_points", "tolerance",
           "run_validation"]

GRID_LEVELS = (1, 2)
GRID_KAPPAS = (0.0, 1.0)
GRID_ORDERS = (1, 2)
GRID_PT_DB = (0.0, 5.0, 10.0, 15.0, 20.0)


def validation_points():
    """(label, P_T_dB, PU params, SU params) for every grid point."""
    out = []
    for n, kappa, k, pt in itertools.product(GRID_LEVELS, GRID_KAPPAS, GRID_ORDERS, GRID_PT_DB):
        common = dict(n_p=n, n_s=n, kappa=kappa, mu=1, k=k, P_T_dB=pt)
        pu = build_params({**CAPTIONS["fig3"], "L_R": 2, **common})
        su = build_params({**CAPTIONS["fig4"], "L_S": 2, **common})
        out.append((f"n={n} kappa={kappa:g} k={k}", pt, pu, su))
    return out


def tolerance(se: float) -> float:
    return max(3.0 * se, 0.01)


def _check_point(i, label, pt, pu, su, mc: McConfig, budget: SeriesBudget) -> ResultRow:
    t0 = time.perf_counter()
    a_p = outage_pu_closed_form(pu, budget)
    a_s = outage_su_closed_form(su, budget)
    m_p = estimate_outage(pu, mc)
    m_s = estimate_outage(su, mc)
    tol_p, tol_s = tolerance(m_p.se_p), tolerance(m_s.se_s)
    ok_p = a_p.converged and abs(a_p.value - m_p.op_p_hat) <= tol_p
    ok_s = a_s.converged and abs(a_s.value - m_s.op_s_hat) <= tol_s
    values = dict(
        op_p_analytic=a_p.value, op_p_mc=m_p.op_p_hat, se_p=m_p.se_p, tol_p=tol_p, pass_p=int(ok_p),
        op_s_analytic=a_s.value, op_s_mc=m_s.op_s_hat, se_s=m_s.se_s, tol_s=tol_s, pass_s=int(ok_s),
    )
    return ResultRow(i, "P_T_dB", pt, "case", label, values, time.perf_counter() - t0)


def run_validation(trials: int = 1_000_000, seed: int = 1, workers: int = 1,
                   budget: SeriesBudget = SeriesBudget()) -> list[ResultRow]:
    mc = replace(McConfig(trials=trials, seed=seed), workers=1)
    pts = validation_points()
    if workers <= 1:
        return [_check_point(i, *pt, mc, budget) for i, pt in enumerate(pts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_check_point, i, *pt, mc, budget) for i, pt in enumerate(pts)]
        return [f.result() for f in futures]
