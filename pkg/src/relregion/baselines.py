"""Reference planners: RRT*, Informed RRT* and RRT#.

All three share one extension step (uniform or informed sample, steer by
``eta``, choose the cheapest collision-free parent among the k-nearest,
rewire).  Informed RRT* switches to informed sampling after the first
solution; RRT# follows every extension with a global cost propagation over
the evaluated collision-free edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from relregion.gnat import GnatIndex
from relregion.planner.common import (
    INF,
    PlanResult,
    Termination,
    TraceEvent,
    make_clock,
    path_to_root,
    replan,
    rgg_k,
    set_parent,
)
from relregion.statespace import EmptyInformedSet, State
from relregion.world.scenario import CollisionChecker, Scenario, sample_goal


@dataclass
class BaselineConfig:
    eta: Optional[float] = None  # None: 0.15 * space diagonal
    goal_bias: float = 0.05
    rewire_scale: float = 1.0
    seed: int = 0
    time_budget: Optional[float] = 10.0
    target_cost: Optional[float] = None
    max_iterations: Optional[int] = None
    clock: str = "wall"

    def __post_init__(self):
        if self.eta is not None and not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")


@dataclass(eq=False)
class Vertex:
    id: int
    state: State
    g: float = INF
    parent: Optional[int] = None
    children: Set[int] = field(default_factory=set)
    is_goal: bool = False
    version: int = 0


class RRTStar:
    informed = False
    sharp = False

    def __init__(self, scenario: Scenario, cfg: BaselineConfig,
                 on_event: Optional[Callable[[TraceEvent], None]] = None,
                 on_iteration: Optional[Callable[["RRTStar"], None]] = None):
        self.sc = scenario
        self.space = scenario.space
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.checker = CollisionChecker(scenario)
        self.eta = cfg.eta if cfg.eta is not None else 0.15 * self.space.diagonal()
        self.on_event = on_event
        self.on_iteration = on_iteration
        self.vertices: Dict[int, Vertex] = {}
        self.index: GnatIndex = GnatIndex(self.space.metric)
        self.valid_adj: Dict[int, Dict[int, float]] = {}
        self.goals: List[int] = []
        self.c_cur = INF
        self.best_goal: Optional[int] = None
        self.trace: List[TraceEvent] = []
        self.iteration = 0
        self.samples_drawn = 0
        self._term: Optional[Termination] = None
        root = self._add(scenario.start)
        root.g = 0.0

    def _add(self, x: State) -> Vertex:
        v = Vertex(len(self.vertices), x)
        v.is_goal = self.space.distance(x, self.sc.goal_center) <= self.sc.goal_radius
        self.vertices[v.id] = v
        self.index.insert(v.id, x)
        self.valid_adj[v.id] = {}
        if v.is_goal:
            self.goals.append(v.id)
        return v

    def draw(self) -> State:
        self.samples_drawn += 1
        if self.rng.random() < self.cfg.goal_bias:
            return sample_goal(self.sc, self.rng)
        if self.informed and self.c_cur < INF:
            try:
                return self.space.sample_informed(self.sc.start, self.sc.goal_center,
                                                  self.c_cur + self.sc.goal_radius, self.rng)
            except EmptyInformedSet:
                pass
        return self.space.sample_uniform(self.rng)

    def _motion(self, a: Vertex, b: Vertex, d: float) -> bool:
        ok = self.checker.motion_valid(a.state, b.state, d)
        if ok:
            self.valid_adj[a.id][b.id] = d
            self.valid_adj[b.id][a.id] = d
        return ok

    def _propagate(self, v: Vertex) -> None:
        stack = list(v.children)
        while stack:
            w = self.vertices[stack.pop()]
            w.g = self.vertices[w.parent].g + self.space.distance(self.vertices[w.parent].state, w.state)
            w.version += 1
            stack.extend(w.children)

    def extend(self) -> List[int]:
        """One sample/steer/choose-parent/rewire step; returns ids whose cost dropped."""
        x_rand = self.draw()
        near_id = self.index.nearest(x_rand)
        x_near = self.vertices[near_id].state
        d = self.space.distance(x_near, x_rand)
        x_new = x_rand if d <= self.eta else self.space.interpolate(x_near, x_rand, self.eta / d)
        if not self.checker.state_valid(x_new):
            return []
        k = rgg_k(self.index.size() + 1, self.space.dimension, self.cfg.rewire_scale)
        near = self.index.k_nearest_with_distances(x_new, k)
        cands = sorted((self.vertices[u].g + du, u, du) for du, u in near)
        parent = None
        checked: Dict[int, bool] = {}
        for cost, u, du in cands:
            if cost == INF:
                break
            ok = self.checker.motion_valid(self.vertices[u].state, x_new, du)
            checked[u] = ok
            if ok:
                parent = (u, du)
                break
        if parent is None:
            return []
        v = self._add(x_new)
        pu, pd = parent
        self.valid_adj[v.id][pu] = pd
        self.valid_adj[pu][v.id] = pd
        set_parent(self.vertices, v, self.vertices[pu])
        v.g = self.vertices[pu].g + pd
        changed = [v.id]
        for du, u in near:
            w = self.vertices[u]
            if u == pu or not v.g + du < w.g:
                continue
            ok = checked.get(u)
            if ok is None:
                ok = self._motion(v, w, du)
            elif ok:
                self.valid_adj[v.id][u] = du
                self.valid_adj[u][v.id] = du
            if ok:
                set_parent(self.vertices, w, v)
                w.g = v.g + du
                w.version += 1
                changed.append(u)
                if not self.sharp:
                    self._propagate(w)
        if self.sharp:
            changed = replan(self.vertices, self.valid_adj, changed)
        return changed

    def _update_incumbent(self) -> None:
        best = min(self.goals, key=lambda i: (self.vertices[i].g, i), default=None)
        if best is not None and self.vertices[best].g < self.c_cur:
            self.c_cur = self.vertices[best].g
            self.best_goal = best
            ev = TraceEvent(self._term.elapsed(), self.c_cur, self.iteration, self.checker.motion_checks)
            self.trace.append(ev)
            if self.on_event is not None:
                self.on_event(ev)

    def solve(self) -> PlanResult:
        cfg = self.cfg
        self._term = term = Termination(make_clock(cfg.clock, self.checker), cfg.time_budget,
                                        cfg.target_cost, cfg.max_iterations)
        while not term.done(self.iteration, self.c_cur):
            if self.extend():
                self._update_incumbent()
            self.iteration += 1
            if self.on_iteration is not None:
                self.on_iteration(self)
        return self.result()

    def result(self) -> PlanResult:
        ids = path_to_root(self.vertices, self.best_goal) if self.best_goal is not None else []
        counters = {
            "edge_evals": self.checker.motion_checks,
            "state_checks": self.checker.state_checks,
            "samples": self.samples_drawn,
            "iterations": self.iteration,
        }
        return PlanResult(self._term.status(self.c_cur), self.c_cur, [self.vertices[i].state for i in ids],
                          list(self.trace), counters, path_ids=ids)


class InformedRRTStar(RRTStar):
    informed = True


class RRTSharp(RRTStar):
    sharp = True


def rrt_star_plan(sc: Scenario, cfg: BaselineConfig, on_event=None) -> PlanResult:
    return RRTStar(sc, cfg, on_event=on_event).solve()


def informed_rrt_star_plan(sc: Scenario, cfg: BaselineConfig, on_event=None) -> PlanResult:
    return InformedRRTStar(sc, cfg, on_event=on_event).solve()


def rrt_sharp_plan(sc: Scenario, cfg: BaselineConfig, on_event=None) -> PlanResult:
    return RRTSharp(sc, cfg, on_event=on_event).solve()
