"""Command line entry: ``plan``, ``bench`` and ``calibrate`` subcommands.

Exit codes: 0 success, 2 infeasible or every run DNF, 1 any error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from relregion.bench.output import FORMATS, emit
from relregion.bench.registry import PLANNERS, get_planner, make_config
from relregion.bench.runner import (
    CalibrationFailed,
    calibrate_c_opt,
    load_bench_config,
    resolve_scenario,
    run_benchmark,
)
from relregion.bench.stats import aggregate

log = logging.getLogger("relregion")

EXIT_OK, EXIT_ERROR, EXIT_NO_SOLUTION = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relregion", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planner once")
    p.add_argument("--scenario", required=True, help="scenario JSON path or built-in name")
    p.add_argument("--planner", required=True, choices=sorted(PLANNERS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=10.0, help="seconds")
    tgt = p.add_mutually_exclusive_group()
    tgt.add_argument("--target", type=float, help="absolute cost target")
    tgt.add_argument("--target-ratio", type=float, help="target as a fraction of c_opt")
    p.add_argument("--c-opt", type=float, help="reference optimum for --target-ratio (default: calibrate)")
    p.add_argument("--calibration-budget", type=float, default=60.0)
    p.add_argument("--clock", choices=("wall", "work"), default="wall")
    p.add_argument("--out", type=Path, help="write the result as JSON")

    b = sub.add_parser("bench", help="run a benchmark config")
    b.add_argument("--config", required=True, type=Path)
    b.add_argument("--out-dir", required=True, type=Path)
    b.add_argument("--profile", choices=("ci", "paper"))
    b.add_argument("--formats", default=",".join(FORMATS), help="comma list of csv,json,svg")

    c = sub.add_parser("calibrate", help="estimate c_opt with one long RRT* run")
    c.add_argument("--scenario", required=True)
    c.add_argument("--budget", type=float, default=60.0)
    c.add_argument("--clock", choices=("wall", "work"), default="wall")
    return ap


def _cmd_plan(args) -> int:
    sc = resolve_scenario(args.scenario)
    target = args.target
    if args.target_ratio is not None:
        if not 0.0 < args.target_ratio <= 1.0:
            raise ValueError("--target-ratio must lie in (0, 1]")
        c_opt = args.c_opt if args.c_opt is not None else calibrate_c_opt(sc, args.calibration_budget)
        target = args.target_ratio * c_opt
    cfg = make_config(args.planner, seed=args.seed, time_budget=args.budget, target_cost=target, clock=args.clock)
    res = get_planner(args.planner).run(sc, cfg)
    print(f"{args.planner} {sc.name} seed={args.seed} status={res.status.value} cost={res.best_cost:.6g} "
          f"edge_evals={res.counters['edge_evals']}")
    if args.out is not None:
        doc = res.to_dict()
        doc["best_cost"] = res.best_cost if math.isfinite(res.best_cost) else None
        args.out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if not res.solved or (target is not None and res.best_cost > target):
        return EXIT_NO_SOLUTION
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = load_bench_config(args.config).with_profile(args.profile)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    report = run_benchmark(cfg)
    for path in emit(report, args.out_dir, formats):
        log.info("wrote %s", path)
    for sc, cells in aggregate(report).items():
        for name, st in cells.items():
            tt = st["time_to_target"]
            print(f"{sc} {name}: solved {st['solved'][-1]}/{tt['runs']}, dnf {tt['dnf']}, "
                  f"median time-to-target {tt['median']}")
    return EXIT_NO_SOLUTION if all(r.dnf for r in report.records) else EXIT_OK


def _cmd_calibrate(args) -> int:
    sc = resolve_scenario(args.scenario)
    try:
        c_opt = calibrate_c_opt(sc, args.budget, clock=args.clock)
    except CalibrationFailed as exc:
        print(exc, file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(repr(c_opt))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"plan": _cmd_plan, "bench": _cmd_bench, "calibrate": _cmd_calibrate}[args.command]
    try:
        return handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
