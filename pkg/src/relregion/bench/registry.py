"""Planner registry: name -> (config class, entry point)."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Dict, Optional

from relregion.baselines import BaselineConfig, informed_rrt_star_plan, rrt_sharp_plan, rrt_star_plan
from relregion.planner import PlannerConfig, plan


@dataclass(frozen=True)
class PlannerEntry:
    config_cls: type
    run: Callable


PLANNERS: Dict[str, PlannerEntry] = {
    "rrtstar": PlannerEntry(BaselineConfig, rrt_star_plan),
    "informed_rrtstar": PlannerEntry(BaselineConfig, informed_rrt_star_plan),
    "rrtsharp": PlannerEntry(BaselineConfig, rrt_sharp_plan),
    "relregion": PlannerEntry(PlannerConfig, plan),
}

# Tuple-valued fields arrive from JSON as lists.
_TUPLE_FIELDS = {"lambdas", "mag_clamp"}


def get_planner(name: str) -> PlannerEntry:
    try:
        return PLANNERS[name]
    except KeyError:
        raise KeyError(f"unknown planner {name!r}; known: {', '.join(PLANNERS)}") from None


def make_config(name: str, overrides: Optional[dict] = None, **run_fields):
    """Build a planner config from JSON-style overrides plus per-run fields (seed, budget, ...)."""
    cls = get_planner(name).config_cls
    known = {f.name for f in fields(cls)}
    kw = dict(overrides or {})
    kw.update(run_fields)
    unknown = set(kw) - known
    if unknown:
        raise ValueError(f"{name}: unknown config fields {sorted(unknown)}")
    for key in _TUPLE_FIELDS & set(kw):
        kw[key] = tuple(kw[key])
    return cls(**kw)
