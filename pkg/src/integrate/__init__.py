from .solvers import InputPolicy, euler_step, plant_rate, rk4_step, simulate
from .trajectory import TRAJECTORY_COLUMNS, Trajectory

__all__ = [
    "InputPolicy",
    "TRAJECTORY_COLUMNS",
    "Trajectory",
    "euler_step",
    "plant_rate",
    "rk4_step",
    "simulate",
]
