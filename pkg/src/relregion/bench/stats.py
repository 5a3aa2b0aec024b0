"""Pure aggregation of benchmark records: cost-over-time bands and time-to-target."""
from __future__ import annotations

import bisect
from typing import Dict, List, Optional, Sequence

import numpy as np

from relregion.planner.common import TraceEvent

GRID_POINTS = 200
GRID_START = 0.01  # seconds; the grid is open at this end


def time_grid(budget: float, points: int = GRID_POINTS) -> np.ndarray:
    """``points`` log-spaced times over (10 ms, budget]."""
    lo = GRID_START if budget > GRID_START else budget / 100.0
    return np.geomspace(lo, budget, points + 1)[1:]


def cost_at(trace: Sequence[TraceEvent], t: float) -> Optional[float]:
    """Incumbent cost at time ``t``: the last event at or before ``t`` (step function, no interpolation)."""
    times = [e.elapsed for e in trace]
    i = bisect.bisect_right(times, t)
    return trace[i - 1].cost if i else None


def quartiles(values: Sequence[float]):
    q25, q50, q75 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q25), float(q50), float(q75)


def _first_time(grid: np.ndarray, counts: List[int], need: float) -> Optional[float]:
    for t, c in zip(grid, counts):
        if c >= need:
            return float(t)
    return None


def cell_stats(records, budget: float, points: int = GRID_POINTS) -> dict:
    grid = time_grid(budget, points)
    runs = len(records)
    median: List[Optional[float]] = []
    lower: List[Optional[float]] = []
    upper: List[Optional[float]] = []
    solved: List[int] = []
    for t in grid:
        costs = [c for c in (cost_at(r.trace, t) for r in records) if c is not None]
        solved.append(len(costs))
        if costs:
            q25, q50, q75 = quartiles(costs)
        else:
            q25 = q50 = q75 = None
        lower.append(q25)
        median.append(q50)
        upper.append(q75)
    t50 = _first_time(grid, solved, 0.5 * runs)
    t95 = _first_time(grid, solved, 0.95 * runs)
    # The curve starts once half the runs have a solution and stops once 95% do.
    if t50 is None:
        drawn = []
    else:
        end = t95 if t95 is not None else float(grid[-1])
        drawn = [i for i, t in enumerate(grid) if t50 <= t <= end]

    reached = [r.time_to_target for r in records if r.time_to_target is not None]
    evals = [r.evals_to_target for r in records if r.evals_to_target is not None]
    ttt = {"median": None, "q25": None, "q75": None, "evals_median": None,
           "dnf": sum(1 for r in records if r.dnf), "runs": runs}
    if reached:
        ttt["q25"], ttt["median"], ttt["q75"] = quartiles(reached)
    if evals:
        ttt["evals_median"] = quartiles(evals)[1]
    return {
        "grid": [float(t) for t in grid],
        "median": median,
        "q25": lower,
        "q75": upper,
        "solved": solved,
        "success_fraction": [s / runs for s in solved],
        "t50": t50,
        "t95": t95,
        "curve": drawn,
        "time_to_target": ttt,
    }


def aggregate(report, points: int = GRID_POINTS) -> Dict[str, Dict[str, dict]]:
    """``{scenario: {planner: stats}}``; a pure function of ``report.records``."""
    budget = float(report.config["time_budget"])
    out: Dict[str, Dict[str, dict]] = {}
    for sc in report.scenarios():
        out[sc] = {}
        for name in report.planners():
            cell = report.cell(sc, name)
            if cell:
                out[sc][name] = cell_stats(cell, budget, points)
    return out
