import json
import math

import numpy as np
import pytest
from scipy.optimize import linprog
from shapely.geometry import Point, Polygon

from relregion.statespace import SpaceDef, State, quat_to_matrix
from relregion.world import geometry as geo
from relregion.world.corpus import BUILDERS, load_builtin
from relregion.world.io import ParseError, load_scenario, save_scenario
from relregion.world.scenario import (
    CollisionChecker,
    InvalidScenario,
    Obstacle,
    RobotShape,
    Scenario,
    is_motion_valid,
    is_state_valid,
    sample_goal,
)

SE2 = SpaceDef("SE2", ((-10, 10), (-10, 10)))
BOUNDARY = 1e-7


def _world(obstacles, robot, space=SE2, start=None, goal=None):
    start = start or (State.se2(-9, -9) if space.kind == "SE2" else State.se3((0.5, 0.5, 0.5)))
    goal = goal or start
    return Scenario(space, tuple(obstacles), robot, start, goal, 0.0)


def _halfspaces(poly):
    rows, rhs = [], []
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        n = np.array([y1 - y0, x0 - x1])
        n /= np.linalg.norm(n)
        rows.append(n)
        rhs.append(n @ (x0, y0))
    return np.array(rows), np.array(rhs)


def _max_slack(a_ub, b_ub, n_free):
    # Maximize s subject to a_ub @ p + s <= b_ub: positive s means a common interior point.
    a = np.hstack([a_ub, np.ones((len(a_ub), 1))])
    c = np.zeros(n_free + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=a, b_ub=b_ub, bounds=[(None, None)] * n_free + [(None, 10.0)], method="highs")
    assert res.status == 0
    return -res.fun


def _random_convex(rng, center, spread):
    from scipy.spatial import ConvexHull
    pts = center + rng.uniform(-spread, spread, (7, 2))
    hull = ConvexHull(pts)
    return [tuple(map(float, pts[i])) for i in hull.vertices]


def test_state_examples():
    box = Obstacle.box((2, -1), (3, 1))
    assert is_state_valid(_world([], RobotShape("point")), State.se2(0, 0))
    assert is_state_valid(_world([box], RobotShape("disc", radius=1)), State.se2(0, 0))
    assert not is_state_valid(_world([box], RobotShape("disc", radius=1)), State.se2(1.5, 0))
    assert not is_state_valid(_world([], RobotShape("point")), State.se2(11, 0))


def test_boundary_contact_is_collision():
    box = Obstacle.box((2, -1), (3, 1))
    assert not is_state_valid(_world([box], RobotShape("disc", radius=1)), State.se2(1, 0))
    assert not is_state_valid(_world([box], RobotShape("point")), State.se2(2, 0.5))


def test_disc_and_point_agree_with_shapely():
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(1000):
        verts = _random_convex(rng, rng.uniform(-3, 3, 2), 2.0)
        ob = Obstacle.polygon(verts) if rng.random() < 0.5 else Obstacle.box(*sorted_box(rng))
        shp = Polygon(ob.as_polygon())
        p = tuple(rng.uniform(-6, 6, 2))
        r = float(rng.uniform(0.05, 1.5))
        dist = shp.exterior.distance(Point(p))
        inside = shp.contains(Point(p))
        if abs(dist - r) > BOUNDARY:
            expect = inside or dist < r
            assert is_state_valid(_world([ob], RobotShape("disc", radius=r)), State.se2(*p)) == (not expect)
            checked += 1
        if dist > BOUNDARY:
            assert is_state_valid(_world([ob], RobotShape("point")), State.se2(*p)) == (not inside)
    assert checked > 900


def sorted_box(rng):
    a, b = rng.uniform(-4, 4, 2), rng.uniform(-4, 4, 2)
    return tuple(np.minimum(a, b) - 0.05), tuple(np.maximum(a, b) + 0.05)


def test_polygon_footprint_agrees_with_lp_oracle():
    rng = np.random.default_rng(1)
    footprint = ((-0.6, -0.2), (0.6, -0.2), (0.6, 0.2), (-0.6, 0.2))
    robot = RobotShape("polygon", footprint=footprint)
    checked = 0
    for _ in range(1000):
        ob = Obstacle.polygon(_random_convex(rng, rng.uniform(-2, 2, 2), 1.5))
        x = State.se2(*rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi))
        body = geo.transform_polygon(footprint, *x.translation, x.rotation)
        a1, b1 = _halfspaces(list(body))
        a2, b2 = _halfspaces(list(ob.as_polygon()))
        s = _max_slack(np.vstack([a1, a2]), np.concatenate([b1, b2]), 2)
        if abs(s) > BOUNDARY:
            assert is_state_valid(_world([ob], robot), x) == (s < 0)
            checked += 1
    assert checked > 900


def test_oriented_box_agrees_with_lp_oracle():
    rng = np.random.default_rng(2)
    space = SpaceDef("SE3", ((-10, 10),) * 3)
    half = (0.5, 0.2, 0.3)
    robot = RobotShape("box", half_extents=half)
    checked = 0
    for _ in range(1000):
        lo = rng.uniform(-1.5, 0.5, 3)
        hi = lo + rng.uniform(0.1, 1.5, 3)
        ob = Obstacle.box(lo, hi)
        x = State.se3(rng.uniform(-1.5, 1.5, 3), rng.standard_normal(4))
        rot = np.array(quat_to_matrix(x.rotation))
        c = np.array(x.translation)
        # Variables (p, u): p = c + R u, |u_i| <= h_i, lo <= p <= hi; equality via two inequalities.
        rows, rhs = [], []
        for i in range(3):
            e = np.zeros(6)
            e[3 + i] = 1
            rows += [e, -e]
            rhs += [half[i], half[i]]
            e = np.zeros(6)
            e[i] = 1
            rows += [e, -e]
            rhs += [hi[i], -lo[i]]
        a = np.array(rows)
        b = np.array(rhs)
        eq = np.hstack([np.eye(3), -rot])
        ext = np.vstack([a, eq, -eq])
        ext_b = np.concatenate([b, c, -c])
        # The equality rows must not receive slack.
        a_full = np.hstack([ext, np.r_[np.ones(len(a)), np.zeros(6)][:, None]])
        res = linprog(np.r_[np.zeros(6), -1.0], A_ub=a_full, b_ub=ext_b,
                      bounds=[(None, None)] * 6 + [(None, 10.0)], method="highs")
        s = -res.fun
        if abs(s) > BOUNDARY:
            assert is_state_valid(_world([ob], robot, space), x) == (s < 0)
            checked += 1
    assert checked > 900


def test_sphere_and_point_3d():
    space = SpaceDef("SE3", ((-5, 5),) * 3)
    ob = Obstacle.box((0, 0, 0), (1, 1, 1))
    sphere = RobotShape("disc", radius=0.5)
    assert is_state_valid(_world([ob], sphere, space), State.se3((1.6, 0.5, 0.5)))
    assert not is_state_valid(_world([ob], sphere, space), State.se3((1.4, 0.5, 0.5)))
    # Corner region: distance to the corner, not to a face.
    assert is_state_valid(_world([ob], sphere, space), State.se3((1.3, 1.3, 1.3)))
    assert not is_state_valid(_world([ob], RobotShape("point"), space), State.se3((0.5, 0.5, 0.5)))


def test_motion_examples_and_properties():
    wall = Obstacle.box((-0.25, -10), (0.25, 10))
    sc = _world([wall], RobotShape("disc", radius=0.1))
    a, b = State.se2(-3, 0), State.se2(3, 0)
    assert not is_motion_valid(sc, a, b)
    assert is_motion_valid(_world([], RobotShape("point")), a, b)
    inside = State.se2(0, 0)
    assert not is_motion_valid(sc, inside, State.se2(-3, 0))
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, q = SE2.sample_uniform(rng), SE2.sample_uniform(rng)
        assert is_motion_valid(sc, p, q) == is_motion_valid(sc, q, p)
        assert is_motion_valid(sc, p, p) == is_state_valid(sc, p)


def test_halving_resolution_never_validates_an_invalid_motion():
    rng = np.random.default_rng(4)
    obs = [Obstacle.box((x, -10), (x + 0.05, 10)) for x in (-6.0, -2.0, 3.0)]
    coarse = Scenario(SE2, tuple(obs), RobotShape("point"), State.se2(-9, 0), State.se2(-9, 0), 0.0,
                      resolution=0.05)
    fine = Scenario(SE2, tuple(obs), RobotShape("point"), State.se2(-9, 0), State.se2(-9, 0), 0.0,
                    resolution=0.025)
    flips = 0
    for _ in range(500):
        p, q = SE2.sample_uniform(rng), SE2.sample_uniform(rng)
        if not is_motion_valid(coarse, p, q):
            assert not is_motion_valid(fine, p, q)
        elif not is_motion_valid(fine, p, q):
            flips += 1
    assert flips > 0  # the coarse check does miss thin walls


def test_checker_counts_edges_and_states():
    sc = load_builtin("maze")
    chk = CollisionChecker(sc)
    chk.motion_valid(State.se2(1, 1), State.se2(2, 1))
    assert chk.motion_checks == 1 and chk.state_checks >= 2
    chk.state_valid(State.se2(1, 1))
    assert chk.motion_checks == 1


def test_sample_goal():
    sc = load_builtin("maze")
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = sample_goal(sc, rng)
        assert sc.space.distance(x, sc.goal_center) <= sc.goal_radius
    zero = Scenario(sc.space, sc.obstacles, sc.robot, sc.start, sc.goal_center, 0.0)
    assert sample_goal(zero, rng) is sc.goal_center


MINIMAL = """{
  "format": 1,
  "name": "tiny",
  "space": {"type": "SE2", "bounds": [[0, 1], [0, 1]]},
  "robot": {"kind": "point", "params": {}},
  "obstacles": [],
  "start": {"translation": [0.1, 0.1], "rotation": 0.0},
  "goal": {"center": {"translation": [0.9, 0.9], "rotation": 0.0}, "radius": 0.05}
}
"""


def test_load_minimal_and_round_trip():
    sc = load_scenario(MINIMAL)
    assert sc.obstacles == () and sc.name == "tiny"
    once = save_scenario(load_scenario(MINIMAL))
    assert save_scenario(load_scenario(once)) == once
    for name in BUILDERS:
        text = save_scenario(BUILDERS[name]())
        assert load_scenario(text, validate=False) == load_scenario(text, validate=False)
        assert save_scenario(load_scenario(text, validate=False)) == text


def test_quaternion_normalized_on_load():
    doc = json.loads(save_scenario(load_builtin("narrow_passage_3d")))
    doc["start"]["rotation"] = [2.0, 0.0, 0.0, 0.0]
    sc = load_scenario(json.dumps(doc))
    assert sc.start.rotation == (1.0, 0.0, 0.0, 0.0)


def test_start_in_collision_rejected():
    doc = json.loads(MINIMAL)
    doc["obstacles"] = [{"kind": "box", "data": {"min": [0.0, 0.0], "max": [0.3, 0.3]}}]
    with pytest.raises(InvalidScenario):
        load_scenario(json.dumps(doc))


def test_goal_region_in_collision_rejected():
    doc = json.loads(MINIMAL)
    doc["obstacles"] = [{"kind": "box", "data": {"min": [0.7, 0.7], "max": [1.0, 1.0]}}]
    with pytest.raises(InvalidScenario):
        load_scenario(json.dumps(doc))


def test_parse_errors_carry_line():
    with pytest.raises(ParseError) as err:
        load_scenario('{"format": 1,\n "space": }')
    assert err.value.line == 2
    doc = MINIMAL.replace('"type": "SE2"', '"type": "SE9"')
    with pytest.raises(ParseError) as err:
        load_scenario(doc)
    assert err.value.line == 4
    with pytest.raises(ParseError):
        load_scenario(MINIMAL.replace('"format": 1', '"format": 2'))
    with pytest.raises(ParseError):
        load_scenario(MINIMAL.replace('"start"', '"begin"'))


def test_nonconvex_or_clockwise_polygon_rejected():
    with pytest.raises(InvalidScenario):
        Obstacle.polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    with pytest.raises(InvalidScenario):
        Obstacle.polygon([(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)])
    with pytest.raises(InvalidScenario):
        Obstacle.box((0, 0), (0, 1))


def test_shipped_corpus_matches_builders():
    for name, build in BUILDERS.items():
        assert load_builtin(name) == build()


def test_wall_world_has_no_free_crossing():
    sc = load_builtin("wall")
    assert not is_motion_valid(sc, sc.start, sc.goal_center)
