"""JSON scenario documents (``"format": 1``)."""
from __future__ import annotations

import json
import re
from typing import Any, Optional

from relregion.statespace import SpaceDef, State, quat_normalize, wrap_angle
from relregion.world.scenario import DEFAULT_RESOLUTION, InvalidScenario, Obstacle, RobotShape, Scenario

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, line: Optional[int], reason: str):
        self.line = line
        self.reason = reason
        where = f"line {line}" if line is not None else "document"
        super().__init__(f"{where}: {reason}")


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _state_from(obj: Any, kind: str) -> State:
    t = [float(c) for c in obj["translation"]]
    r = obj["rotation"]
    if kind == "SE2":
        if len(t) != 2:
            raise ValueError("SE2 translation needs 2 components")
        return State((t[0], t[1]), wrap_angle(float(r)))
    if len(t) != 3 or len(r) != 4:
        raise ValueError("SE3 state needs a 3-vector translation and a [w,x,y,z] quaternion")
    return State(tuple(t), quat_normalize(r))


def _state_to(x: State) -> dict:
    r = x.rotation
    return {"translation": list(x.translation), "rotation": r if isinstance(r, float) else list(r)}


def _robot_from(obj: Any) -> RobotShape:
    kind = obj["kind"]
    params = obj.get("params", {}) or {}
    if kind == "point":
        return RobotShape("point")
    if kind == "disc":
        return RobotShape("disc", radius=float(params["radius"]))
    if kind == "polygon":
        return RobotShape("polygon", footprint=tuple((float(x), float(y)) for x, y in params["vertices"]))
    if kind == "box":
        return RobotShape("box", half_extents=tuple(float(h) for h in params["half_extents"]))
    raise ValueError(f"unknown robot kind {kind!r}")


def _robot_to(r: RobotShape) -> dict:
    params: dict = {}
    if r.kind == "disc":
        params = {"radius": r.radius}
    elif r.kind == "polygon":
        params = {"vertices": [list(v) for v in r.footprint]}
    elif r.kind == "box":
        params = {"half_extents": list(r.half_extents)}
    return {"kind": r.kind, "params": params}


def _obstacle_from(obj: Any) -> Obstacle:
    kind = obj["kind"]
    data = obj["data"]
    if kind == "polygon":
        return Obstacle.polygon(data)
    if kind == "box":
        return Obstacle.box(data["min"], data["max"])
    raise ValueError(f"unknown obstacle kind {kind!r}")


def _obstacle_to(ob: Obstacle) -> dict:
    if ob.kind == "polygon":
        return {"kind": "polygon", "data": [list(v) for v in ob.vertices]}
    return {"kind": "box", "data": {"min": list(ob.lo), "max": list(ob.hi)}}


def load_scenario(text: str, validate: bool = True) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(1, "top level must be an object")
    if doc.get("format") != FORMAT_VERSION:
        raise ParseError(_line_of(text, "format"), f"unsupported format {doc.get('format')!r}")
    section = "space"
    try:
        sp = doc["space"]
        space = SpaceDef(sp["type"], tuple(tuple(b) for b in sp["bounds"]),
                         float(sp.get("w_t", 1.0)), float(sp.get("w_r", 1.0)))
        section = "robot"
        robot = _robot_from(doc.get("robot", {"kind": "point"}))
        section = "obstacles"
        obstacles = tuple(_obstacle_from(o) for o in doc.get("obstacles", []))
        section = "start"
        start = _state_from(doc["start"], space.kind)
        section = "goal"
        goal = doc["goal"]
        center = _state_from(goal["center"], space.kind)
        radius = float(goal.get("radius", 0.0))
        section = "resolution"
        resolution = float(doc.get("resolution", DEFAULT_RESOLUTION))
    except InvalidScenario:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        reason = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise ParseError(_line_of(text, section), f"{section}: {reason}") from None
    sc = Scenario(space, obstacles, robot, start, center, radius,
                  name=str(doc.get("name", "scenario")), resolution=resolution)
    return sc.validate() if validate else sc


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "format": FORMAT_VERSION,
        "name": sc.name,
        "space": {
            "type": sc.space.kind,
            "bounds": [list(b) for b in sc.space.bounds],
            "w_t": sc.space.w_t,
            "w_r": sc.space.w_r,
        },
        "robot": _robot_to(sc.robot),
        "obstacles": [_obstacle_to(o) for o in sc.obstacles],
        "start": _state_to(sc.start),
        "goal": {"center": _state_to(sc.goal_center), "radius": sc.goal_radius},
        "resolution": sc.resolution,
    }


def save_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())
