"""Vertex weighting, step estimation and the perturbed relevant-region sampler."""
from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from relregion.planner.common import INF
from relregion.statespace import SpaceDef, State, quat_from_axis_angle, quat_mul, wrap_angle


class NotPromising(ValueError):
    """The vertex leaves no positive step inside the incumbent cost."""


def vertex_weight(n_selected: int, n_out: int, f_hat: float, c_cur: float,
                  lambdas: Sequence[float] = (1.0, 1.0, 1.0)) -> float:
    l1, l2, l3 = lambdas
    heuristic = 0.0 if math.isinf(c_cur) else f_hat / c_cur
    return l1 * n_selected + l2 * n_out + l3 * heuristic


def weight_vertices(vertices: Sequence, c_cur: float, lambdas: Sequence[float] = (1.0, 1.0, 1.0),
                    tol: float = 0.0) -> List[Tuple[float, int]]:
    """Priority list of relevant forward-tree vertices, lowest weight first.

    A vertex is admitted only with finite cost-to-come and cost-to-go whose
    sum beats ``c_cur`` by more than ``tol``.  Ties break on id.
    """
    queue = []
    for v in vertices:
        f_hat = v.g + v.h_rev
        if math.isfinite(f_hat) and f_hat < c_cur - tol:
            queue.append((vertex_weight(v.n_selected, len(v.children), f_hat, c_cur, lambdas), v.id))
    queue.sort()
    return queue


def step_size(c_cur: float, g: float, h_rev: float, gamma_max: float) -> float:
    """Largest step along the reverse-tree direction that can still beat ``c_cur``, capped at ``gamma_max``."""
    gamma = min(c_cur - g - h_rev, gamma_max)
    if not gamma > 0.0:
        raise NotPromising(f"step {gamma} <= 0 (c_cur={c_cur}, g={g}, h_rev={h_rev})")
    return gamma


def unit(vec: Sequence[float]) -> Optional[Tuple[float, ...]]:
    n = math.sqrt(sum(c * c for c in vec))
    if n == 0.0 or not math.isfinite(n):
        return None
    return tuple(c / n for c in vec)


def random_unit(dim: int, rng: np.random.Generator) -> Tuple[float, ...]:
    while True:
        u = unit(rng.standard_normal(dim).tolist())
        if u is not None:
            return u


def estimate_step(v, c_cur: float, gamma_max: float, goal_center: State,
                  rng: np.random.Generator) -> Tuple[float, Tuple[float, ...]]:
    """Step magnitude and unit translation direction for expanding around ``v``.

    The direction follows the reverse-tree edge out of ``v`` (toward the
    goal).  Goal vertices have no such edge and aim at the goal center; a
    zero-length edge falls back to a random direction.
    """
    gamma = step_size(c_cur, v.g, v.h_rev, gamma_max)
    target = v.rev_next if v.rev_next is not None else goal_center
    e = unit([b - a for a, b in zip(v.state.translation, target.translation)])
    if e is None:
        e = random_unit(len(v.state.translation), rng)
    return gamma, e


def rotate_direction(e: Tuple[float, ...], angle: float, rng: np.random.Generator) -> Tuple[float, ...]:
    """Rotate a unit vector by ``angle``: in-plane for 2D, about a random orthogonal axis in 3D."""
    if angle == 0.0:
        return e
    c, s = math.cos(angle), math.sin(angle)
    if len(e) == 2:
        return (c * e[0] - s * e[1], s * e[0] + c * e[1])
    # Any unit vector orthogonal to e; rotating e about axis k gives e*c + (k x e)*s.
    ev = np.asarray(e)
    while True:
        k = rng.standard_normal(3)
        k -= k.dot(ev) * ev
        n = np.linalg.norm(k)
        if n > 1e-9:
            k /= n
            break
    out = ev * c + np.cross(k, ev) * s
    return tuple(float(x) for x in out)


def perturbed_sample(space: SpaceDef, v_state: State, gamma: float, e: Tuple[float, ...],
                     sigma_dir: float, mag_clamp: Tuple[float, float], rot_sigma: float,
                     rng: np.random.Generator) -> State:
    """Draw ``v + gamma_hat * e_hat`` with Gaussian direction and magnitude noise.

    The magnitude factor is ``|N(1, 0.25)|`` clamped to ``mag_clamp``.  The
    rotation is inherited from ``v`` with Gaussian jitter whose metric cost is
    taken out of the step budget, so ``distance(v, x) <= gamma_hat``.
    """
    lo, hi = mag_clamp
    scale = lo if lo == hi else min(max(abs(rng.normal(1.0, 0.25)), lo), hi)
    gamma_hat = gamma * scale
    angle = rng.normal(0.0, sigma_dir) if sigma_dir > 0 else 0.0
    e_hat = rotate_direction(e, angle, rng)
    jitter = rng.normal(0.0, rot_sigma) if rot_sigma > 0 else 0.0
    if space.w_r > 0 and space.w_r * abs(jitter) > gamma_hat:
        jitter = math.copysign(gamma_hat / space.w_r, jitter)
    budget = gamma_hat - space.w_r * abs(jitter)
    length = max(budget, 0.0) / space.w_t
    t = tuple(a + length * b for a, b in zip(v_state.translation, e_hat))
    if jitter == 0.0:
        return State(t, v_state.rotation)
    if space.kind == "SE2":
        return State(t, wrap_angle(v_state.rotation + jitter))
    axis = rng.standard_normal(3)
    return State(t, quat_mul(v_state.rotation, quat_from_axis_angle(axis, jitter)))


def sample_relevant(queue: Sequence[Tuple[float, int]], vertices: dict, quota: int, space: SpaceDef,
                    c_cur: float, gamma_max: float, goal_center: State, sigma_dir: float,
                    mag_clamp: Tuple[float, float], rot_sigma: float, rng: np.random.Generator,
                    is_valid: Callable[[State], bool] = lambda x: True,
                    max_attempts: int = 100) -> List[State]:
    """Expand each queued vertex ``ExpandTimes`` times, stopping once ``quota`` states exist.

    Each emitted state must pass ``is_valid``; a slot is redrawn up to
    ``max_attempts`` times and abandoned after that.
    """
    if quota <= 0 or not queue:
        return []
    expand_times = max(1, quota // len(queue))
    out: List[State] = []
    for _, vid in queue:
        v = vertices[vid]
        try:
            gamma, e = estimate_step(v, c_cur, gamma_max, goal_center, rng)
        except NotPromising:
            continue
        for _ in range(expand_times):
            if len(out) >= quota:
                return out
            v.n_selected += 1
            for _ in range(max_attempts):
                x = perturbed_sample(space, v.state, gamma, e, sigma_dir, mag_clamp, rot_sigma, rng)
                if is_valid(x):
                    out.append(x)
                    break
    return out
