"""SE(2)/SE(3) states, the weighted compound metric, interpolation and samplers.

States are immutable value objects.  The translation is a tuple of floats and
the rotation is either a planar angle in (-pi, pi] or a unit quaternion stored
as ``(w, x, y, z)``.  Costs are plain floats; ``math.inf`` is the "no solution"
sentinel and IEEE arithmetic gives the saturating addition we need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

INF = math.inf
TWO_PI = 2.0 * math.pi

Quaternion = Tuple[float, float, float, float]
Rotation = Union[float, Quaternion]


class EmptyInformedSet(ValueError):
    """The informed set is empty: the cost bound is below the focal distance."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def quat_normalize(q: Sequence[float]) -> Quaternion:
    w, x, y, z = (float(c) for c in q)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n == 0.0 or not math.isfinite(n):
        raise ValueError(f"cannot normalize quaternion {tuple(q)!r}")
    return (w / n, x / n, y / n, z / n)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_angle(a: Quaternion, b: Quaternion) -> float:
    """Geodesic angle in [0, pi] between the rotations of two unit quaternions.

    Uses the vector part of conj(a)*b with atan2, which stays accurate for
    nearly identical rotations (acos of the dot product does not).
    """
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    w = aw * bw + ax * bx + ay * by + az * bz
    vx = aw * bx - bw * ax - (ay * bz - az * by)
    vy = aw * by - bw * ay - (az * bx - ax * bz)
    vz = aw * bz - bw * az - (ax * by - ay * bx)
    return 2.0 * math.atan2(math.sqrt(vx * vx + vy * vy + vz * vz), abs(w))


def quat_from_axis_angle(axis: Sequence[float], angle: float) -> Quaternion:
    ax, ay, az = axis
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n == 0.0:
        return (1.0, 0.0, 0.0, 0.0)
    s = math.sin(0.5 * angle) / n
    return (math.cos(0.5 * angle), ax * s, ay * s, az * s)


def quat_slerp(a: Quaternion, b: Quaternion, u: float) -> Quaternion:
    """Spherical interpolation along the shorter great circle."""
    dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
    if dot < 0.0:
        b = (-b[0], -b[1], -b[2], -b[3])
        dot = -dot
    theta = quat_angle(a, b) * 0.5
    if theta < 1e-12:
        q = tuple(ai + u * (bi - ai) for ai, bi in zip(a, b))
        return quat_normalize(q)
    s = math.sin(theta)
    ka = math.sin((1.0 - u) * theta) / s
    kb = math.sin(u * theta) / s
    return quat_normalize(tuple(ka * ai + kb * bi for ai, bi in zip(a, b)))


def quat_to_matrix(q: Quaternion) -> Tuple[Tuple[float, float, float], ...]:
    w, x, y, z = q
    return (
        (1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)),
        (2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)),
        (2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)),
    )


@dataclass(frozen=True, slots=True)
class State:
    translation: Tuple[float, ...]
    rotation: Rotation

    @classmethod
    def se2(cls, x: float, y: float, theta: float = 0.0) -> "State":
        return cls((float(x), float(y)), wrap_angle(float(theta)))

    @classmethod
    def se3(cls, translation: Sequence[float], quaternion: Sequence[float] = (1.0, 0.0, 0.0, 0.0)) -> "State":
        return cls(tuple(float(c) for c in translation), quat_normalize(quaternion))


@dataclass(frozen=True)
class SpaceDef:
    """Bounded SE(2) or SE(3) space with metric weights.

    ``w_t`` scales translation distance and ``w_r`` scales rotation angle.
    """

    kind: str
    bounds: Tuple[Tuple[float, float], ...]
    w_t: float = 1.0
    w_r: float = 1.0

    def __post_init__(self):
        if self.kind not in ("SE2", "SE3"):
            raise ValueError(f"unknown space type {self.kind!r}")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if len(bounds) != self.tdim:
            raise ValueError(f"{self.kind} needs {self.tdim} translation bounds, got {len(bounds)}")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty bound [{lo}, {hi}]")
        if not self.w_t > 0 or not self.w_r >= 0:
            raise ValueError("metric weights must satisfy w_t > 0, w_r >= 0")
        if not math.isfinite(self.diagonal()):
            raise ValueError("space diagonal must be finite")
        object.__setattr__(self, "metric", _make_metric(self.kind, float(self.w_t), float(self.w_r)))
        object.__setattr__(self, "_frames", {})

    @property
    def tdim(self) -> int:
        return 2 if self.kind == "SE2" else 3

    @property
    def dimension(self) -> int:
        """Manifold dimension: 3 for SE(2), 6 for SE(3)."""
        return 3 if self.kind == "SE2" else 6

    def diagonal(self) -> float:
        ext = math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds))
        return self.w_t * ext + self.w_r * math.pi

    def in_bounds(self, x: State) -> bool:
        for c, (lo, hi) in zip(x.translation, self.bounds):
            if not lo <= c <= hi:
                return False
        return True

    def rotation_distance(self, ra: Rotation, rb: Rotation) -> float:
        if self.kind == "SE2":
            d = abs(rb - ra)
            return TWO_PI - d if d > math.pi else d
        return quat_angle(ra, rb)

    def distance(self, a: State, b: State) -> float:
        return self.metric(a, b)

    def pack(self, states: Sequence[State]) -> Tuple[np.ndarray, np.ndarray]:
        """Translation and rotation arrays for ``pairwise``."""
        t = np.array([x.translation for x in states], dtype=float).reshape(len(states), self.tdim)
        r = np.array([x.rotation for x in states], dtype=float)
        if self.kind == "SE3":
            r = r.reshape(len(states), 4)
        return t, r

    def pairwise(self, a: Tuple[np.ndarray, np.ndarray], b: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
        """Metric between every packed state of ``a`` (rows) and of ``b`` (columns)."""
        ta, ra = a
        tb, rb = b
        dt = np.sqrt(((ta[:, None, :] - tb[None, :, :]) ** 2).sum(axis=-1))
        if self.kind == "SE2":
            dr = np.abs(rb[None, :] - ra[:, None])
            dr = np.where(dr > math.pi, TWO_PI - dr, dr)
        else:
            aw, ax, ay, az = (ra[:, i, None] for i in range(4))
            bw, bx, by, bz = (rb[None, :, i] for i in range(4))
            w = aw * bw + ax * bx + ay * by + az * bz
            vx = aw * bx - bw * ax - (ay * bz - az * by)
            vy = aw * by - bw * ay - (az * bx - ax * bz)
            vz = aw * bz - bw * az - (ax * by - ay * bx)
            dr = 2.0 * np.arctan2(np.sqrt(vx * vx + vy * vy + vz * vz), np.abs(w))
        return self.w_t * dt + self.w_r * dr

    def interpolate(self, a: State, b: State, u: float) -> State:
        if u <= 0.0:
            return a
        if u >= 1.0:
            return b
        t = tuple(ta + u * (tb - ta) for ta, tb in zip(a.translation, b.translation))
        if self.kind == "SE2":
            return State(t, wrap_angle(a.rotation + u * wrap_angle(b.rotation - a.rotation)))
        return State(t, quat_slerp(a.rotation, b.rotation, u))

    def sample_rotation(self, rng: np.random.Generator) -> Rotation:
        if self.kind == "SE2":
            return math.pi - TWO_PI * rng.random()
        # Shoemake's subgroup algorithm, three uniform variates.
        u1, u2, u3 = rng.random(3)
        a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
        t2, t3 = TWO_PI * u2, TWO_PI * u3
        return quat_normalize((b * math.cos(t3), a * math.sin(t2), a * math.cos(t2), b * math.sin(t3)))

    def sample_uniform(self, rng: np.random.Generator) -> State:
        t = tuple(float(lo + (hi - lo) * rng.random()) for lo, hi in self.bounds)
        return State(t, self.sample_rotation(rng))

    def sample_informed(self, x_start: State, x_goal: State, c_cur: float, rng: np.random.Generator) -> State:
        """Uniform translation inside the prolate hyperspheroid of focal sum ``c_cur / w_t``.

        Rotation is uniform; it only adds nonnegative cost, so nothing that
        could beat ``c_cur`` is excluded.  An infinite bound falls back to
        uniform sampling over the bounds.
        """
        if math.isinf(c_cur):
            return self.sample_uniform(rng)
        s = np.asarray(x_start.translation)
        g = np.asarray(x_goal.translation)
        c_min = float(np.linalg.norm(g - s))
        c_max = c_cur / self.w_t
        if c_max < c_min:
            raise EmptyInformedSet(f"cost bound {c_cur} below focal distance {self.w_t * c_min}")
        n = self.tdim
        ball = rng.standard_normal(n)
        ball *= rng.random() ** (1.0 / n) / np.linalg.norm(ball)
        minor = math.sqrt(max(c_max * c_max - c_min * c_min, 0.0)) / 2.0
        radii = np.full(n, minor)
        radii[0] = c_max / 2.0
        key = (x_start.translation, x_goal.translation)
        frame = self._frames.get(key)
        if frame is None:
            frame = self._frames[key] = _focal_frame(s, g)
        t = frame @ (radii * ball) + (s + g) / 2.0
        return State(tuple(float(c) for c in t), self.sample_rotation(rng))


def _make_metric(kind: str, w_t: float, w_r: float):
    hypot, pi, two_pi = math.hypot, math.pi, TWO_PI
    if kind == "SE2":
        def metric(a: State, b: State) -> float:
            ta, tb = a.translation, b.translation
            dr = abs(b.rotation - a.rotation)
            if dr > pi:
                dr = two_pi - dr
            return w_t * hypot(tb[0] - ta[0], tb[1] - ta[1]) + w_r * dr
    else:
        def metric(a: State, b: State) -> float:
            ta, tb = a.translation, b.translation
            return (w_t * hypot(tb[0] - ta[0], tb[1] - ta[1], tb[2] - ta[2])
                    + w_r * quat_angle(a.rotation, b.rotation))
    return metric


def _focal_frame(s: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Rotation taking the first axis onto the start-goal direction."""
    n = s.shape[0]
    d = g - s
    norm = np.linalg.norm(d)
    if norm == 0.0:
        return np.eye(n)
    a1 = d / norm
    u, _, vt = np.linalg.svd(np.outer(a1, np.eye(n)[0]))
    fix = np.ones(n)
    fix[-1] = np.linalg.det(u) * np.linalg.det(vt)
    return u @ np.diag(fix) @ vt


def distance(a: State, b: State, s: SpaceDef) -> float:
    return s.distance(a, b)


def interpolate(a: State, b: State, s: SpaceDef, u: float) -> State:
    return s.interpolate(a, b, u)


def sample_uniform(s: SpaceDef, rng: np.random.Generator) -> State:
    return s.sample_uniform(rng)


def sample_informed(s: SpaceDef, x_start: State, x_goal: State, c_cur: float, rng: np.random.Generator) -> State:
    return s.sample_informed(x_start, x_goal, c_cur, rng)
