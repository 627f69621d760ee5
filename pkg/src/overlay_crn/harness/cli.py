"""Command-line entry point: ``overlay-crn {run,preset,validate,optimize}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .output import emit_csv, emit_plotdata
from .presets import preset, preset_names
from .runner import run_scenario
from .scenario import Scenario, ScenarioError, dump_scenario, load_scenario
from .validation import run_validation

__all__ = ["main", "build_parser"]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    p.add_argument("--seed", type=int, help="Monte-Carlo seed (64-bit unsigned)")
    p.add_argument("--out", type=Path, help="output directory (CSV + plot data); stdout CSV if omitted")
    p.add_argument("--workers", type=int, default=1, help="sweep points evaluated concurrently")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any row failed")
    p.add_argument("--timings", action="store_true", help="add a wall_time column to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="overlay-crn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario file")
    run.add_argument("scenario", type=Path)
    run.add_argument("--engine", choices=["mc", "analytic", "both"])
    _common(run)

    pre = sub.add_parser("preset", help="evaluate a built-in scenario")
    pre.add_argument("name", nargs="?", choices=preset_names())
    pre.add_argument("--list", action="store_true", help="list preset names")
    pre.add_argument("--dump", action="store_true", help="print the preset as a scenario file")
    pre.add_argument("--engine", choices=["mc", "analytic", "both"])
    _common(pre)

    val = sub.add_parser("validate", help="analytic vs Monte-Carlo outage on the 40-point grid")
    _common(val)

    opt = sub.add_parser("optimize", help="optimize (rho, A_f) for every point of a scenario")
    opt.add_argument("scenario", type=Path)
    _common(opt)
    return parser


def _apply_overrides(s: Scenario, args) -> Scenario:
    mc = s.mc
    if args.trials is not None:
        mc = replace(mc, trials=args.trials)
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    s = replace(s, mc=mc)
    engine = getattr(args, "engine", None)
    if engine:
        s = replace(s, engines=("mc", "analytic") if engine == "both" else (engine,))
    return s


def _emit(rows, name: str, out: Optional[Path], timings: bool):
    if out is None:
        emit_csv(rows, sys.stdout, timings=timings)
        return
    out.mkdir(parents=True, exist_ok=True)
    emit_csv(rows, out / f"{name}.csv", timings=timings)
    emit_plotdata(rows, out / "plotdata", stem=name)


def _finish(rows, strict: bool, extra_fail=()) -> int:
    failed = [{"index": r.index, "sweep": r.sweep, "series": r.series, "error": r.error} for r in rows if r.error]
    failed.extend(extra_fail)
    if failed and strict:
        json.dump({"failed_rows": failed}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            if args.list or not args.name:
                print("\n".join(preset_names()))
                return 0
            s = preset(args.name)
            if args.dump:
                sys.stdout.write(dump_scenario(s))
                return 0
        elif args.command in ("run", "optimize"):
            s = load_scenario(args.scenario)
            if args.command == "optimize":
                s = replace(s, task="optimize")
        else:
            rows = run_validation(
                trials=args.trials or 1_000_000, seed=1 if args.seed is None else args.seed, workers=args.workers
            )
            _emit(rows, "validation", args.out, args.timings)
            bad = [{"index": r.index, "case": r.series, "P_T_dB": r.sweep, "error": "engines disagree"}
                   for r in rows if not (r.values["pass_p"] and r.values["pass_s"])]
            passed = len(rows) - len(bad)
            print(f"validation: {passed}/{len(rows)} points agree", file=sys.stderr)
            return _finish(rows, args.strict, bad)
    except ScenarioError as exc:
        json.dump({"error": "scenario", "field": exc.field, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    s = _apply_overrides(s, args)
    rows = run_scenario(s, workers=args.workers)
    _emit(rows, s.name, args.out, args.timings)
    return _finish(rows, args.strict)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
