from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from relregion.statespace import SpaceDef, State, quat_mul, quat_from_axis_angle, quat_to_matrix, wrap_angle
from relregion.world import geometry as geo

DEFAULT_RESOLUTION = 0.01


class InvalidScenario(ValueError):
    pass


@dataclass(frozen=True)
class Obstacle:
    """Convex polygon (2D, CCW) or axis-aligned box (2D or 3D)."""

    kind: str
    vertices: Tuple[Tuple[float, float], ...] = ()
    lo: Tuple[float, ...] = ()
    hi: Tuple[float, ...] = ()
    # Derived: the polygon form (2D) and the axis-aligned bounds, for the broad phase.
    poly: geo.Polygon = field(init=False, repr=False, compare=False, default=())
    bbox: Tuple[Tuple[float, ...], Tuple[float, ...]] = field(init=False, repr=False, compare=False, default=((), ()))

    def __post_init__(self):
        if self.kind == "polygon":
            xs = [v[0] for v in self.vertices]
            ys = [v[1] for v in self.vertices]
            object.__setattr__(self, "poly", self.vertices)
            object.__setattr__(self, "bbox", ((min(xs), min(ys)), (max(xs), max(ys))))
        else:
            if len(self.lo) == 2:
                object.__setattr__(self, "poly", geo.box_polygon(self.lo, self.hi))
            object.__setattr__(self, "bbox", (self.lo, self.hi))

    @classmethod
    def polygon(cls, vertices: Sequence[Sequence[float]]) -> "Obstacle":
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if not geo.is_convex_ccw(verts):
            raise InvalidScenario(f"polygon is not convex and counter-clockwise: {verts}")
        return cls("polygon", vertices=verts)

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float]) -> "Obstacle":
        lo = tuple(float(c) for c in lo)
        hi = tuple(float(c) for c in hi)
        if len(lo) != len(hi) or len(lo) not in (2, 3) or any(l >= h for l, h in zip(lo, hi)):
            raise InvalidScenario(f"bad box corners {lo} {hi}")
        return cls("box", lo=lo, hi=hi)

    @property
    def dim(self) -> int:
        return 2 if self.kind == "polygon" else len(self.lo)

    def as_polygon(self) -> geo.Polygon:
        return self.poly


@dataclass(frozen=True)
class RobotShape:
    """A single convex body: point, disc (sphere in 3D), 2D footprint polygon or 3D box."""

    kind: str = "point"
    radius: float = 0.0
    footprint: Tuple[Tuple[float, float], ...] = ()
    half_extents: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind == "disc" and not self.radius > 0:
            raise InvalidScenario("disc radius must be positive")
        if self.kind == "polygon" and not geo.is_convex_ccw(self.footprint):
            raise InvalidScenario("robot footprint must be convex and counter-clockwise")
        if self.kind == "box" and not all(h > 0 for h in self.half_extents):
            raise InvalidScenario("box half-extents must be positive")
        if self.kind not in ("point", "disc", "polygon", "box"):
            raise InvalidScenario(f"unknown robot kind {self.kind!r}")


@dataclass(frozen=True)
class Scenario:
    space: SpaceDef
    obstacles: Tuple[Obstacle, ...]
    robot: RobotShape
    start: State
    goal_center: State
    goal_radius: float
    name: str = "scenario"
    resolution: float = DEFAULT_RESOLUTION

    def validate(self, rng_seed: int = 0, goal_probes: int = 1000) -> "Scenario":
        """Check start validity and that the goal region holds a valid state."""
        tdim = self.space.tdim
        for ob in self.obstacles:
            if ob.dim != tdim:
                raise InvalidScenario(f"{ob.kind} obstacle of dimension {ob.dim} in a {self.space.kind} space")
        if self.robot.kind == "polygon" and tdim != 2:
            raise InvalidScenario("polygon footprints are 2D only")
        if self.robot.kind == "box" and tdim != 3:
            raise InvalidScenario("box robots are 3D only")
        if not self.goal_radius >= 0:
            raise InvalidScenario("goal radius must be nonnegative")
        if not is_state_valid(self, self.start):
            raise InvalidScenario("start state is in collision or out of bounds")
        if is_state_valid(self, self.goal_center):
            return self
        rng = np.random.default_rng(rng_seed)
        for _ in range(goal_probes if self.goal_radius > 0 else 0):
            if is_state_valid(self, sample_goal(self, rng)):
                return self
        raise InvalidScenario("no valid state found in the goal region")


def _state_hits(sc: Scenario, x: State) -> bool:
    robot = sc.robot
    t = x.translation
    if sc.space.kind == "SE2":
        px, py = t
        if robot.kind == "polygon":
            body = geo.transform_polygon(robot.footprint, px, py, x.rotation)
            bx = [v[0] for v in body]
            by = [v[1] for v in body]
            blo, bhi = (min(bx), min(by)), (max(bx), max(by))
            for ob in sc.obstacles:
                lo, hi = ob.bbox
                if blo[0] > hi[0] or bhi[0] < lo[0] or blo[1] > hi[1] or bhi[1] < lo[1]:
                    continue
                if geo.polygons_intersect(body, ob.poly):
                    return True
            return False
        if robot.kind == "disc":
            r = robot.radius
            for ob in sc.obstacles:
                lo, hi = ob.bbox
                if px + r < lo[0] or px - r > hi[0] or py + r < lo[1] or py - r > hi[1]:
                    continue
                if ob.kind == "box":
                    if geo.sphere_hits_aabb(t, r, lo, hi):
                        return True
                elif geo.disc_hits_polygon(px, py, r, ob.poly):
                    return True
            return False
        return any(geo.point_in_aabb(t, *ob.bbox) and geo.point_in_polygon(px, py, ob.poly) for ob in sc.obstacles)
    if robot.kind == "box":
        rot = quat_to_matrix(x.rotation)
        return any(geo.obb_hits_aabb(t, rot, robot.half_extents, ob.lo, ob.hi) for ob in sc.obstacles)
    if robot.kind == "disc":
        return any(geo.sphere_hits_aabb(t, robot.radius, ob.lo, ob.hi) for ob in sc.obstacles)
    return any(geo.point_in_aabb(t, ob.lo, ob.hi) for ob in sc.obstacles)


def is_state_valid(sc: Scenario, x: State) -> bool:
    return sc.space.in_bounds(x) and not _state_hits(sc, x)


def motion_checkpoints(sc: Scenario, a: State, b: State) -> int:
    """Number of subdivisions: the smallest power of two keeping checks within resolution."""
    step = sc.resolution * sc.space.diagonal()
    d = sc.space.distance(a, b)
    n = 1
    while d / n > step:
        n *= 2
    return n


def _canonical(a: State, b: State) -> Tuple[State, State]:
    ka = (a.translation, a.rotation)
    kb = (b.translation, b.rotation)
    return (a, b) if ka <= kb else (b, a)


def is_motion_valid(sc: Scenario, a: State, b: State) -> bool:
    return CollisionChecker(sc).motion_valid(a, b)


def sample_goal(sc: Scenario, rng: np.random.Generator) -> State:
    """Uniform draw from the metric ball around the goal center (rejection sampling)."""
    r = sc.goal_radius
    c = sc.goal_center
    if r <= 0:
        return c
    space = sc.space
    rt = r / space.w_t
    while True:
        off = [rt * (2.0 * rng.random() - 1.0) for _ in range(space.tdim)]
        if space.w_r > 0:
            ang = min(r / space.w_r, math.pi) * (2.0 * rng.random() - 1.0)
        else:
            ang = math.pi * (2.0 * rng.random() - 1.0)
        t = tuple(ci + oi for ci, oi in zip(c.translation, off))
        if space.kind == "SE2":
            x = State(t, wrap_angle(c.rotation + ang))
        else:
            axis = rng.standard_normal(3)
            x = State(t, quat_mul(c.rotation, quat_from_axis_angle(axis, ang)))
        if space.distance(c, x) <= r:
            return x


@dataclass
class CollisionChecker:
    """State and motion validation with call counters.

    ``motion_checks`` is the number of edge evaluations; ``state_checks``
    counts individual state validity tests, including those made on behalf
    of motion checks.
    """

    scenario: Scenario
    state_checks: int = 0
    motion_checks: int = 0
    _step: float = field(init=False, repr=False)

    def __post_init__(self):
        self._step = self.scenario.resolution * self.scenario.space.diagonal()

    def state_valid(self, x: State) -> bool:
        self.state_checks += 1
        return is_state_valid(self.scenario, x)

    def motion_valid(self, a: State, b: State, dist: Optional[float] = None) -> bool:
        self.motion_checks += 1
        sc = self.scenario
        a, b = _canonical(a, b)
        if dist is None:
            dist = sc.space.distance(a, b)
        n = 1
        while dist / n > self._step:
            n *= 2
        # Endpoints first, then the interior in bisection order.
        if not self.state_valid(a) or not self.state_valid(b):
            return False
        interp = sc.space.interpolate
        step = n
        while step > 1:
            half = step // 2
            for i in range(half, n, step):
                if not self.state_valid(interp(a, b, i / n)):
                    return False
            step = half
        return True
