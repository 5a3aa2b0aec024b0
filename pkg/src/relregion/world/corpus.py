"""Hand-authored benchmark scenarios.

These are small analogues of common planning benchmarks (a bug trap, a
serpentine maze, scattered convex polygons, a slotted wall in 3D), not
copies of any published mesh data.  ``write_corpus`` dumps them as JSON
into the package ``scenarios`` directory.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from relregion.statespace import SpaceDef, State
from relregion.world.io import read_scenario, save_scenario
from relregion.world.scenario import Obstacle, RobotShape, Scenario, is_state_valid

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def empty_world() -> Scenario:
    space = SpaceDef("SE2", ((-5, 5), (-5, 5)))
    return Scenario(space, (), RobotShape("point"), State.se2(-4, 0), State.se2(4, 0), 0.1, name="empty")


def wall_world() -> Scenario:
    """A wall spanning the whole workspace: no solution exists."""
    space = SpaceDef("SE2", ((-5, 5), (-5, 5)))
    wall = Obstacle.box((-0.25, -5.0), (0.25, 5.0))
    return Scenario(space, (wall,), RobotShape("disc", radius=0.1), State.se2(-4, 0), State.se2(4, 0), 0.1,
                    name="wall")


def bugtrap() -> Scenario:
    """Rectangular robot starting inside a U-shaped trap that opens away from the goal."""
    space = SpaceDef("SE2", ((-5, 5), (-5, 5)))
    walls = (
        Obstacle.box((-1.2, -1.5), (-1.0, 1.5)),
        Obstacle.box((-3.5, 1.3), (-1.0, 1.5)),
        Obstacle.box((-3.5, -1.5), (-1.0, -1.3)),
        Obstacle.box((-3.5, 0.6), (-3.3, 1.5)),
        Obstacle.box((-3.5, -1.5), (-3.3, -0.6)),
    )
    robot = RobotShape("polygon", footprint=((-0.2, -0.08), (0.2, -0.08), (0.2, 0.08), (-0.2, 0.08)))
    return Scenario(space, walls, robot, State.se2(-2, 0), State.se2(3.5, 0), 0.2, name="bugtrap")


def maze() -> Scenario:
    """Serpentine corridors with a few pillars; disc robot."""
    space = SpaceDef("SE2", ((0, 10), (0, 10)))
    walls = (
        Obstacle.box((0.0, 2.4), (7.5, 2.6)),
        Obstacle.box((2.5, 4.9), (10.0, 5.1)),
        Obstacle.box((0.0, 7.4), (7.5, 7.6)),
        Obstacle.box((4.0, 0.0), (4.2, 1.4)),
        Obstacle.box((6.0, 1.2), (6.2, 2.4)),
        Obstacle.box((5.0, 3.6), (5.2, 4.9)),
        Obstacle.box((3.5, 5.1), (3.7, 6.2)),
        Obstacle.box((6.5, 6.3), (6.7, 7.4)),
    )
    return Scenario(space, walls, RobotShape("disc", radius=0.15), State.se2(1, 1), State.se2(1, 9), 0.2,
                    name="maze")


def random_polygons(seed: int = 7, count: int = 14) -> Scenario:
    space = SpaceDef("SE2", ((0, 10), (0, 10)))
    rng = np.random.default_rng(seed)
    start, goal = State.se2(0.5, 0.5, math.pi / 4), State.se2(9.5, 9.5, math.pi / 4)
    robot = RobotShape("disc", radius=0.1)
    obstacles = []
    while len(obstacles) < count:
        center = rng.uniform(1.0, 9.0, 2)
        pts = center + rng.uniform(-0.9, 0.9, (8, 2))
        hull = ConvexHull(pts)
        verts = [tuple(round(float(c), 4) for c in pts[i]) for i in hull.vertices]
        ob = Obstacle.polygon(verts)
        trial = Scenario(space, (ob,), robot, start, goal, 0.2)
        if is_state_valid(trial, start) and is_state_valid(trial, goal):
            obstacles.append(ob)
    return Scenario(space, tuple(obstacles), robot, start, goal, 0.2, name="random_polygons")


def narrow_passage_3d() -> Scenario:
    """Two rooms separated by a wall with a thin vertical slot; oriented box robot."""
    space = SpaceDef("SE3", ((0, 10), (0, 4), (0, 4)))
    x0, x1 = 4.8, 5.2
    slot_y, slot_z = (1.7, 2.3), (1.0, 3.0)
    walls = (
        Obstacle.box((x0, 0.0, 0.0), (x1, slot_y[0], 4.0)),
        Obstacle.box((x0, slot_y[1], 0.0), (x1, 4.0, 4.0)),
        Obstacle.box((x0, slot_y[0], 0.0), (x1, slot_y[1], slot_z[0])),
        Obstacle.box((x0, slot_y[0], slot_z[1]), (x1, slot_y[1], 4.0)),
    )
    robot = RobotShape("box", half_extents=(0.4, 0.12, 0.3))
    return Scenario(space, walls, robot, State.se3((2, 2, 2)), State.se3((8, 2, 2)), 0.3, name="narrow_passage_3d")


BUILDERS = {
    "empty": empty_world,
    "wall": wall_world,
    "bugtrap": bugtrap,
    "maze": maze,
    "random_polygons": random_polygons,
    "narrow_passage_3d": narrow_passage_3d,
}


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.json"


def load_builtin(name: str) -> Scenario:
    return read_scenario(scenario_path(name))


def write_corpus(directory: Path = SCENARIO_DIR) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        sc = build().validate()
        (directory / f"{name}.json").write_text(save_scenario(sc), encoding="utf-8")


if __name__ == "__main__":
    write_corpus()
