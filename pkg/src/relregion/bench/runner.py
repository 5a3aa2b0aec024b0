"""Benchmark configuration, the repeated-run driver and c_opt calibration."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from relregion.baselines import BaselineConfig, rrt_star_plan
from relregion.bench.registry import get_planner, make_config
from relregion.planner.common import TraceEvent
from relregion.world.corpus import BUILDERS, scenario_path
from relregion.world.io import load_scenario, save_scenario
from relregion.world.scenario import Scenario

CALIBRATION_SEED = 1
THREADS_ENV = "RELREGION_THREADS"

PROFILES = {
    "ci": {"runs": 20, "time_budget": 20.0},
    "paper": {"runs": 100, "time_budget": 300.0},
}


class CalibrationFailed(RuntimeError):
    """The calibration run found no solution, so c_opt is undefined."""


@dataclass
class BenchConfig:
    scenarios: List[str]
    planners: Dict[str, dict]
    runs: int = 100
    time_budget: float = 20.0
    target_cost: Optional[float] = None
    target_ratio: Optional[float] = None
    c_opt: Dict[str, float] = field(default_factory=dict)
    calibration_budget: float = 60.0
    base_seed: int = 0
    clock: str = "wall"

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.time_budget > 0:
            raise ValueError("time_budget must be positive")
        if self.target_ratio is not None and not 0.0 < self.target_ratio <= 1.0:
            raise ValueError("target_ratio must lie in (0, 1]")
        if self.target_ratio is not None and self.target_cost is not None:
            raise ValueError("give target_cost or target_ratio, not both")
        if isinstance(self.planners, (list, tuple)):
            self.planners = {name: {} for name in self.planners}
        for name in self.planners:
            get_planner(name)

    def with_profile(self, profile: Optional[str]) -> "BenchConfig":
        if profile is None:
            return self
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}")
        return BenchConfig(**{**asdict(self), **PROFILES[profile]})


def load_bench_config(path) -> BenchConfig:
    """Read a JSON bench config; relative scenario paths resolve against its directory."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    refs = []
    for ref in doc.get("scenarios", []):
        if ref not in BUILDERS and not Path(ref).is_absolute():
            ref = str(path.parent / ref)
        refs.append(ref)
    doc["scenarios"] = refs
    return BenchConfig(**doc)


def resolve_scenario(ref: str) -> Scenario:
    """A built-in corpus name or a path to a scenario JSON file."""
    p = scenario_path(ref) if ref in BUILDERS else Path(ref)
    return load_scenario(p.read_text(encoding="utf-8"))


@dataclass
class RunRecord:
    planner: str
    scenario: str
    seed: int
    status: str
    best_cost: Optional[float]  # None when no solution
    trace: List[TraceEvent]
    counters: Dict[str, int]
    target: Optional[float] = None
    time_to_target: Optional[float] = None
    evals_to_target: Optional[int] = None
    error: Optional[str] = None

    @property
    def dnf(self) -> bool:
        if self.target is not None:
            return self.time_to_target is None
        return self.best_cost is None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"] = [asdict(e) for e in self.trace]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["trace"] = [TraceEvent(**e) for e in d["trace"]]
        return cls(**d)


@dataclass
class BenchReport:
    config: dict
    c_opt: Dict[str, float]
    targets: Dict[str, Optional[float]]
    records: List[RunRecord]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "c_opt": dict(self.c_opt),
            "targets": dict(self.targets),
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        return cls(d["config"], dict(d["c_opt"]), dict(d["targets"]),
                   [RunRecord.from_dict(r) for r in d["records"]])

    def cell(self, scenario: str, planner: str) -> List[RunRecord]:
        return [r for r in self.records if r.scenario == scenario and r.planner == planner]

    def planners(self) -> List[str]:
        return list(dict.fromkeys(r.planner for r in self.records))

    def scenarios(self) -> List[str]:
        return list(dict.fromkeys(r.scenario for r in self.records))


def first_reaching(trace: List[TraceEvent], target: float) -> Optional[TraceEvent]:
    for ev in trace:
        if ev.cost <= target:
            return ev
    return None


def calibrate_c_opt(sc: Scenario, budget: float = 60.0, seed: int = CALIBRATION_SEED,
                    clock: str = "wall") -> float:
    """Reference optimum: the final cost of one long RRT* run."""
    res = rrt_star_plan(sc, BaselineConfig(seed=seed, time_budget=budget, clock=clock))
    if not res.solved:
        raise CalibrationFailed(f"{sc.name}: RRT* found no solution within {budget} s")
    return res.best_cost


@lru_cache(maxsize=16)
def _scenario_from_text(text: str) -> Scenario:
    return load_scenario(text, validate=False)


def _run_cell(job: tuple) -> RunRecord:
    sc_text, planner, overrides, seed, budget, target, clock = job
    sc = _scenario_from_text(sc_text)
    try:
        cfg = make_config(planner, overrides, seed=seed, time_budget=budget, target_cost=target, clock=clock)
        res = get_planner(planner).run(sc, cfg)
    except Exception as exc:  # a crashed run is a DNF, never a crashed batch
        return RunRecord(planner, sc.name, seed, "Error", None, [], {}, target, error=f"{type(exc).__name__}: {exc}")
    rec = RunRecord(planner, sc.name, seed, res.status.value, res.best_cost if res.solved else None,
                    list(res.trace), dict(res.counters), target)
    if target is not None:
        ev = first_reaching(rec.trace, target)
        if ev is not None:
            rec.time_to_target = ev.elapsed
            rec.evals_to_target = ev.edge_evals
    return rec


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1")
    return n


def run_benchmark(cfg: BenchConfig, threads: Optional[int] = None) -> BenchReport:
    """Every (scenario, planner, run) cell, seeded ``base_seed + run``.

    Records come back in (scenario, planner, run) order whatever the
    worker count, so aggregates do not depend on completion order.
    """
    scenarios = [resolve_scenario(ref) for ref in cfg.scenarios]
    c_opt: Dict[str, float] = {}
    targets: Dict[str, Optional[float]] = {}
    for sc in scenarios:
        target = cfg.target_cost
        if cfg.target_ratio is not None:
            c_opt[sc.name] = cfg.c_opt.get(sc.name)
            if c_opt[sc.name] is None:
                c_opt[sc.name] = calibrate_c_opt(sc, cfg.calibration_budget, clock=cfg.clock)
            target = cfg.target_ratio * c_opt[sc.name]
        targets[sc.name] = target

    jobs = []
    for sc in scenarios:
        text = save_scenario(sc)
        for name, overrides in cfg.planners.items():
            for run in range(cfg.runs):
                jobs.append((text, name, overrides, cfg.base_seed + run, cfg.time_budget,
                             targets[sc.name], cfg.clock))
    n = threads if threads is not None else thread_count()
    if n <= 1:
        records = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(_run_cell, jobs))
    # Through JSON once so the stored config equals its own round trip.
    config = json.loads(json.dumps(asdict(cfg)))
    return BenchReport(config, c_opt, targets, records)
