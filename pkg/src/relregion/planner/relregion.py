"""Batch planner with relevant-region sampling and adaptive heuristics.

Each iteration prunes the sample set, draws a mixed batch (relevant-region
samples around promising forward-tree vertices plus informed samples),
rebuilds a lazy reverse tree over the k-nearest RGG, and then grows the
forward tree with a vertex/edge queue search that postpones collision checks
until an edge can actually improve the tree.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from relregion.gnat import GnatIndex
from relregion.planner import rgg as rgg_mod
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
from relregion.planner.sampling import sample_relevant, weight_vertices
from relregion.statespace import EmptyInformedSet, State
from relregion.world.scenario import CollisionChecker, Scenario, sample_goal

# Slack used when comparing admissible lower bounds against the incumbent.
PRUNE_TOL = 1e-9


@dataclass
class PlannerConfig:
    m: int = 100
    p_inf: float = 0.5
    gamma_max: Optional[float] = None  # None: 0.1 * space diagonal
    lambdas: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    k_rgg: float = 1.0
    sigma_dir: float = 0.5
    mag_clamp: Tuple[float, float] = (0.1, 1.0)
    rot_jitter_scale: float = 0.1
    seed: int = 0
    time_budget: Optional[float] = 10.0
    target_cost: Optional[float] = None
    max_iterations: Optional[int] = None
    max_attempts: int = 100
    clock: str = "wall"

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("batch size m must be >= 2")
        if not 0.0 <= self.p_inf <= 1.0:
            raise ValueError("p_inf must lie in [0, 1]")
        if self.gamma_max is not None and not self.gamma_max > 0:
            raise ValueError("gamma_max must be positive")
        if not self.k_rgg > 0:
            raise ValueError("k_rgg must be positive")
        lo, hi = self.mag_clamp
        if not 0 <= lo <= hi:
            raise ValueError("mag_clamp must satisfy 0 <= lo <= hi")


@dataclass(eq=False)
class Sample:
    id: int
    state: State
    g: float = INF
    h_rev: float = INF
    rev_next: Optional[State] = None
    parent: Optional[int] = None
    children: Set[int] = field(default_factory=set)
    n_selected: int = 0
    is_goal: bool = False
    version: int = 0

    @property
    def in_forward(self) -> bool:
        return self.g < INF

    @property
    def in_reverse(self) -> bool:
        return self.h_rev < INF

    @property
    def n_out(self) -> int:
        return len(self.children)


class RelevantRegionPlanner:
    def __init__(self, scenario: Scenario, cfg: PlannerConfig,
                 on_event: Optional[Callable[[TraceEvent], None]] = None,
                 on_batch: Optional[Callable[["RelevantRegionPlanner"], None]] = None):
        self.sc = scenario
        self.space = scenario.space
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.checker = CollisionChecker(scenario)
        self.gamma_max = cfg.gamma_max if cfg.gamma_max is not None else 0.1 * self.space.diagonal()
        self.rot_sigma = cfg.rot_jitter_scale * cfg.sigma_dir
        self.on_event = on_event
        self.on_batch = on_batch

        self.samples: Dict[int, Sample] = {}
        self.index: GnatIndex = GnatIndex(self.space.metric)
        self.graph = rgg_mod.CsrGraph.assemble([], [])
        self.knn = rgg_mod.KnnGraph(self.space, self.space.dimension, cfg.k_rgg)
        # Evaluated edges: validity cache and the adjacency of collision-free ones.
        self.edge_valid: Dict[Tuple[int, int], bool] = {}
        self.valid_adj: Dict[int, Dict[int, float]] = {}
        # Append-only edge logs; assembly drops pairs whose endpoints are gone.
        self._free_edges: Tuple[List[int], List[int], List[float]] = ([], [], [])
        self._blocked_edges: List[Tuple[int, int]] = []
        self.pruned_ids: Set[int] = set()
        self.c_cur = INF
        self.best_goal: Optional[int] = None
        self.trace: List[TraceEvent] = []
        self.iteration = 0
        self.samples_drawn = 0
        self._next_id = 0
        self._term: Optional[Termination] = None

        self.start_id = self._add(scenario.start).id
        self.samples[self.start_id].g = 0.0
        # A goal center in collision is never a vertex; goal samples stand in.
        self.goal_center_id: Optional[int] = None
        if self.checker.state_valid(scenario.goal_center):
            self.goal_center_id = self._add(scenario.goal_center, goal=True).id

    # -- bookkeeping -----------------------------------------------------------

    def _add(self, x: State, goal: bool = False) -> Sample:
        s = Sample(self._next_id, x)
        s.is_goal = goal or self.space.distance(x, self.sc.goal_center) <= self.sc.goal_radius
        self._next_id += 1
        self.samples[s.id] = s
        self.index.insert(s.id, x)
        self.valid_adj[s.id] = {}
        return s

    def _drop(self, sid: int) -> None:
        s = self.samples.pop(sid)
        if s.parent is not None and s.parent in self.samples:
            self.samples[s.parent].children.discard(sid)
        for other in self.valid_adj.pop(sid, {}):
            adj = self.valid_adj.get(other)
            if adj is not None:
                adj.pop(sid, None)
        self.index.remove(sid)
        self.pruned_ids.add(sid)

    def forward_vertices(self) -> List[Sample]:
        return [s for s in self.samples.values() if s.in_forward]

    def best_path_ids(self) -> List[int]:
        if self.best_goal is None:
            return []
        return path_to_root(self.samples, self.best_goal)

    def _lower_bound_to_goal(self, x: State) -> float:
        return max(0.0, self.space.distance(x, self.sc.goal_center) - self.sc.goal_radius)

    def _state_valid(self, x: State) -> bool:
        return self.checker.state_valid(x)

    # -- pruning ---------------------------------------------------------------

    def prune(self) -> Set[int]:
        """Drop samples that cannot help or were not connected to both trees.

        Uses the admissible bound d(start, x) + d(x, goal region) for the
        region test and g(x) + d(x, goal region) for forward-tree members; a
        dropped forward vertex takes its subtree with it.  The start, the goal
        center and the incumbent path are kept.
        """
        keep = {self.start_id, self.goal_center_id, *self.best_path_ids()}
        start = self.sc.start
        c = self.c_cur
        doomed: List[int] = []
        for s in self.samples.values():
            if s.id in keep:
                continue
            h_goal = self._lower_bound_to_goal(s.state)
            if self.space.distance(start, s.state) + h_goal > c + PRUNE_TOL:
                doomed.append(s.id)
            elif not (s.in_forward and s.in_reverse):
                doomed.append(s.id)
            elif s.in_forward and s.g + h_goal > c + PRUNE_TOL:
                doomed.append(s.id)
        removed: Set[int] = set()
        detached: List[int] = []
        stack = list(doomed)
        while stack:
            sid = stack.pop()
            if sid in removed:
                continue
            s = self.samples[sid]
            stack.extend(s.children)
            if sid in keep:
                # Only the goal center can sit below a dropped vertex.
                set_parent(self.samples, s, None)
                s.g = INF
                s.version += 1
                detached.append(sid)
            else:
                removed.add(sid)
        for sid in sorted(removed):
            self._drop(sid)
        if detached:
            sources = sorted({u for sid in detached for u in self.valid_adj[sid] if self.samples[u].in_forward})
            replan(self.samples, self.valid_adj, sources, _heuristic)
        return removed

    # -- batch sampling --------------------------------------------------------

    def sample_batch(self) -> List[Sample]:
        cfg = self.cfg
        # Vertices on the incumbent path sit at f_hat == c_cur up to rounding;
        # the slack keeps them from spawning zero-length steps.
        tol = PRUNE_TOL * self.c_cur if math.isfinite(self.c_cur) else 0.0
        queue = weight_vertices(self.forward_vertices(), self.c_cur, cfg.lambdas, tol)
        quota = int(math.floor((1.0 - cfg.p_inf) * cfg.m))
        states = sample_relevant(queue, self.samples, quota, self.space, self.c_cur, self.gamma_max,
                                 self.sc.goal_center, cfg.sigma_dir, cfg.mag_clamp, self.rot_sigma,
                                 self.rng, self._state_valid, cfg.max_attempts)
        # One slot goes to a goal-region sample; the rest are informed.
        for _ in range(cfg.m - len(states) - 1):
            for _ in range(cfg.max_attempts):
                x = self.sample_informed()
                if self._state_valid(x):
                    states.append(x)
                    break
        for _ in range(cfg.max_attempts):
            x = sample_goal(self.sc, self.rng)
            if self._state_valid(x):
                states.append(x)
                break
        self.samples_drawn += len(states)
        provisional = self._provisional_h(states)
        new = []
        for x, h in zip(states, provisional):
            s = self._add(x)
            s.h_rev = h
            new.append(s)
        return new

    def sample_informed(self) -> State:
        # The goal is a region, so the focal bound is widened by its radius.
        bound = self.c_cur + self.sc.goal_radius
        try:
            return self.space.sample_informed(self.sc.start, self.sc.goal_center, bound, self.rng)
        except EmptyInformedSet:
            return self.space.sample_uniform(self.rng)

    def _provisional_h(self, states: List[State]) -> List[float]:
        """min over the k nearest existing samples of h_rev + distance, per new state."""
        if not states or not self.samples:
            return [INF] * len(states)
        ids = sorted(self.samples)
        h = np.array([self.samples[i].h_rev for i in ids])
        k = min(rgg_k(len(ids) + 1, self.space.dimension, self.cfg.k_rgg), len(ids))
        block = self.space.pairwise(self.space.pack(states), self.space.pack([self.samples[i].state for i in ids]))
        kth = np.partition(block, k - 1, axis=1)[:, k - 1]
        out = []
        for row, bound in zip(block, kth):
            cand = np.flatnonzero(row <= bound)
            # Columns are id-ordered, so the column index breaks distance ties by id.
            cand = cand[np.lexsort((cand, row[cand]))][:k]
            out.append(float(np.min(h[cand] + row[cand])))
        return out

    # -- reverse tree ----------------------------------------------------------

    def build_reverse_tree(self) -> None:
        knn = self.knn.update({sid: s.state for sid, s in self.samples.items()})
        # Evaluated collision-free edges stay in the graph, so the incumbent
        # path is always representable and h_rev never exceeds its cost-to-go.
        # Edges already found in collision are left out; no new checks are made.
        self.graph = rgg_mod.CsrGraph.assemble(
            list(self.samples), [self._free_edges, knn.links()], self._blocked_edges)
        goals = [s.id for s in self.samples.values() if s.is_goal]
        dist, succ = rgg_mod.reverse_search(self.graph, goals)
        for s in self.samples.values():
            s.h_rev = dist.get(s.id, INF)
            nxt = succ.get(s.id)
            s.rev_next = self.samples[nxt].state if nxt is not None else None

    # -- forward search --------------------------------------------------------

    def _edge(self, v: Sample, x: Sample, d: float) -> float:
        key = (v.id, x.id) if v.id < x.id else (x.id, v.id)
        ok = self.edge_valid.get(key)
        if ok is None:
            ok = self.checker.motion_valid(v.state, x.state, d)
            self.edge_valid[key] = ok
            if ok:
                self.valid_adj[v.id][x.id] = d
                self.valid_adj[x.id][v.id] = d
                for log, val in zip(self._free_edges, key + (d,)):
                    log.append(val)
            else:
                self._blocked_edges.append(key)
        return d if ok else INF

    def _known_invalid(self, a: int, b: int) -> bool:
        return self.edge_valid.get((a, b) if a < b else (b, a)) is False

    def _update_incumbent(self, changed: List[int]) -> None:
        improved = False
        for sid in changed:
            s = self.samples[sid]
            if s.is_goal and s.g < self.c_cur:
                self.c_cur = s.g
                self.best_goal = sid
                improved = True
        if improved:
            ev = TraceEvent(self._term.elapsed(), self.c_cur, self.iteration, self.checker.motion_checks)
            self.trace.append(ev)
            if self.on_event is not None:
                self.on_event(ev)

    def build_forward_tree(self) -> None:
        samples = self.samples
        qv: list = []
        qe: list = []
        for v in samples.values():
            if v.in_forward:
                key = v.g + v.h_rev
                if key < self.c_cur:
                    heapq.heappush(qv, (key, v.id, v.version))
        popped = 0
        while True:
            while qv and (not qe or qv[0][0] <= qe[0][0]):
                _, vid, ver = heapq.heappop(qv)
                v = samples[vid]
                if v.version != ver:
                    continue
                self._expand(v, qe)
            if not qe:
                break
            popped += 1
            if popped % 64 == 0 and self._term.out_of_time():
                break
            _, vid, xid, ver, c_hat = heapq.heappop(qe)
            v = samples[vid]
            if v.version != ver:
                continue
            x = samples[xid]
            if v.g + c_hat + x.h_rev < self.c_cur:
                if v.g + c_hat < x.g:
                    c_edge = self._edge(v, x, c_hat)
                    if v.g + c_edge + x.h_rev < self.c_cur and v.g + c_edge < x.g:
                        set_parent(samples, x, v)
                        x.g = v.g + c_edge
                        x.version += 1
                        changed = replan(samples, self.valid_adj, [xid], _heuristic)
                        for sid in changed:
                            s = samples[sid]
                            heapq.heappush(qv, (s.g + s.h_rev, sid, s.version))
                        self._update_incumbent(changed)
                        if self._term.target_met(self.c_cur):
                            break
            else:
                qv.clear()
                qe.clear()
                break

    def _expand(self, v: Sample, qe: list) -> None:
        gv = v.g
        if not gv + v.h_rev < self.c_cur:
            return
        for xid, d in self.graph.neighbors(v.id):
            x = self.samples[xid]
            key = gv + d + x.h_rev
            if key < self.c_cur and gv + d < x.g and not self._known_invalid(v.id, xid):
                heapq.heappush(qe, (key, v.id, xid, v.version, d))

    # -- batch loop ------------------------------------------------------------

    def solve(self) -> PlanResult:
        cfg = self.cfg
        self._term = term = Termination(make_clock(cfg.clock, self.checker), cfg.time_budget,
                                        cfg.target_cost, cfg.max_iterations)
        while not term.done(self.iteration, self.c_cur):
            if self.iteration > 0:
                self.prune()
            self.sample_batch()
            self.build_reverse_tree()
            self.build_forward_tree()
            self.iteration += 1
            if self.on_batch is not None:
                self.on_batch(self)
        return self.result()

    def result(self) -> PlanResult:
        ids = self.best_path_ids()
        counters = {
            "edge_evals": self.checker.motion_checks,
            "state_checks": self.checker.state_checks,
            "samples": self.samples_drawn,
            "iterations": self.iteration,
        }
        return PlanResult(self._term.status(self.c_cur), self.c_cur, [self.samples[i].state for i in ids],
                          list(self.trace), counters, path_ids=ids)


def _heuristic(v: Sample) -> float:
    return v.h_rev if v.h_rev < INF else 0.0


def plan(scenario: Scenario, cfg: PlannerConfig, on_event=None) -> PlanResult:
    return RelevantRegionPlanner(scenario, cfg, on_event=on_event).solve()
