from .gridmap import GridMap, load_map, serialize_map
from .env import (
    ACTION_NAMES,
    DOWN,
    FINDTREASURE,
    LEFT,
    MOVEBOX,
    RIGHT,
    UP,
    WAIT,
    Cause,
    EnvState,
    GridEnv,
    JointObservation,
    StepOutcome,
)

__all__ = [
    "GridMap",
    "load_map",
    "serialize_map",
    "ACTION_NAMES",
    "UP",
    "DOWN",
    "LEFT",
    "RIGHT",
    "WAIT",
    "FINDTREASURE",
    "MOVEBOX",
    "Cause",
    "EnvState",
    "GridEnv",
    "JointObservation",
    "StepOutcome",
]
