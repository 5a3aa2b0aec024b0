from relregion.world.io import ParseError, load_scenario, read_scenario, save_scenario
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

__all__ = [
    "CollisionChecker",
    "InvalidScenario",
    "Obstacle",
    "ParseError",
    "RobotShape",
    "Scenario",
    "is_motion_valid",
    "is_state_valid",
    "load_scenario",
    "read_scenario",
    "sample_goal",
    "save_scenario",
]
