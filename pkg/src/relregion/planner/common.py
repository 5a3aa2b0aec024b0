"""Types and machinery shared by the relevant-region planner and the baselines."""
from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

from relregion.statespace import State

INF = math.inf


class Status(str, enum.Enum):
    SOLVED = "Solved"
    TARGET_REACHED = "TargetReached"
    TIMEOUT = "Timeout"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class TraceEvent:
    elapsed: float
    cost: float
    iteration: int
    edge_evals: int


@dataclass
class PlanResult:
    status: Status
    best_cost: float
    path: List[State]
    trace: List[TraceEvent]
    counters: Dict[str, int]
    path_ids: List[int] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return math.isfinite(self.best_cost)

    def deterministic_signature(self) -> tuple:
        """Everything except wall-clock timestamps, for reproducibility checks."""
        return (
            self.status.value,
            self.best_cost,
            tuple((e.cost, e.iteration, e.edge_evals) for e in self.trace),
            tuple(sorted(self.counters.items())),
            tuple((s.translation, s.rotation) for s in self.path),
        )

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "best_cost": self.best_cost,
            "path": [{"translation": list(s.translation),
                      "rotation": s.rotation if isinstance(s.rotation, float) else list(s.rotation)}
                     for s in self.path],
            "trace": [asdict(e) for e in self.trace],
            "counters": dict(self.counters),
        }


class WorkClock:
    """Deterministic clock advancing with collision-check work.

    Reads ``quantum`` seconds per state validity check, so budgets and trace
    timestamps are reproducible run to run.
    """

    def __init__(self, checker, quantum: float = 1e-5):
        self.checker = checker
        self.quantum = quantum

    def __call__(self) -> float:
        return self.checker.state_checks * self.quantum


def make_clock(kind: str, checker) -> Callable[[], float]:
    if kind == "wall":
        return time.perf_counter
    if kind == "work":
        return WorkClock(checker)
    raise ValueError(f"unknown clock {kind!r}")


class Termination:
    """Budget bookkeeping shared by every planner loop."""

    def __init__(self, clock: Callable[[], float], time_budget: Optional[float],
                 target_cost: Optional[float], max_iterations: Optional[int]):
        self.clock = clock
        self.t0 = clock()
        self.time_budget = time_budget
        self.target_cost = target_cost
        self.max_iterations = max_iterations

    def elapsed(self) -> float:
        return self.clock() - self.t0

    def out_of_time(self) -> bool:
        return self.time_budget is not None and self.elapsed() >= self.time_budget

    def target_met(self, cost: float) -> bool:
        return self.target_cost is not None and cost <= self.target_cost

    def done(self, iteration: int, cost: float) -> bool:
        if self.target_met(cost) or self.out_of_time():
            return True
        return self.max_iterations is not None and iteration >= self.max_iterations

    def status(self, cost: float) -> Status:
        if self.target_met(cost):
            return Status.TARGET_REACHED
        return Status.SOLVED if math.isfinite(cost) else Status.TIMEOUT


def set_parent(vertices: dict, child, parent) -> None:
    if child.parent is not None:
        vertices[child.parent].children.discard(child.id)
    child.parent = parent.id if parent is not None else None
    if parent is not None:
        parent.children.add(child.id)


def replan(vertices: dict, valid_adj: Dict[int, Dict[int, float]], sources: Iterable[int],
           heuristic: Callable[[object], float] = lambda v: 0.0) -> List[int]:
    """Propagate cost decreases over already-evaluated collision-free edges.

    ``vertices`` maps id to objects with ``id, g, parent, children, version``.
    Starting from ``sources`` (whose ``g`` just dropped), relaxes edges in
    order of ``g + heuristic`` until no evaluated edge improves any vertex.
    Returns the ids whose ``g`` changed (sources included).
    """
    heap = []
    changed = []
    for sid in sources:
        v = vertices[sid]
        heapq.heappush(heap, (v.g + heuristic(v), sid, v.version))
        changed.append(sid)
    while heap:
        _, uid, ver = heapq.heappop(heap)
        u = vertices.get(uid)
        if u is None or u.version != ver:
            continue
        gu = u.g
        for wid, c in valid_adj.get(uid, {}).items():
            w = vertices[wid]
            ng = gu + c
            if ng < w.g:
                set_parent(vertices, w, u)
                w.g = ng
                w.version += 1
                heapq.heappush(heap, (ng + heuristic(w), wid, w.version))
                changed.append(wid)
    return list(dict.fromkeys(changed))


def path_to_root(vertices: dict, vid: int) -> List[int]:
    ids = []
    seen = set()
    while vid is not None:
        if vid in seen:
            raise RuntimeError("cycle in forward tree")
        seen.add(vid)
        ids.append(vid)
        vid = vertices[vid].parent
    return ids[::-1]


def rgg_k(n: int, dimension: int, k_rgg: float = 1.0) -> int:
    """k-nearest connection count ceil(k_rgg * e * (1 + 1/d) * ln n)."""
    if n <= 1:
        return 1
    return max(1, math.ceil(k_rgg * math.e * (1.0 + 1.0 / dimension) * math.log(n)))
