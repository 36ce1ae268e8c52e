"""
States, inputs and constants of the aluminum electrolysis cell simulator.
"""

from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict

import numpy as np

from ..utils.exceptions import ConfigurationError

STATE_NAMES = ("x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8")
INPUT_NAMES = ("u1", "u2", "u3", "u4", "u5")
N_STATES = len(STATE_NAMES)
N_INPUTS = len(INPUT_NAMES)
N_FEATURES = N_STATES + N_INPUTS

# Components whose dynamics contain the liquidus temperature (1-based)
LIQUIDUS_DEPENDENT = (1, 4, 6, 7)
# Components driven only linearly by the inputs
LINEAR_STATES = (2, 3, 5)


class LiquidusMode(str, Enum):
    """How g1 is obtained: from bath composition, or frozen at a constant."""

    TRUE = "true"
    ABLATED = "ablated"


@dataclass(frozen=True)
class PlantConstants:
    """Lumped coefficients of the cell model. Defaults are the published values."""

    k0: float = 2e-5
    k1: float = 7.5e-4
    k2: float = 0.18
    k3: float = 1.7e-7
    k4: float = 0.036
    k5: float = 0.03
    k6: float = 4.43e-8
    k7: float = 338.0
    k8: float = 1.41
    k9: float = 17.92
    k10: float = 0.00083
    k11: float = 0.2
    k12: float = 237.5
    k13: float = 0.99
    k14: float = 0.0077
    k15: float = 0.2
    k16: float = 35.0
    k17: float = 5.8e-7
    k18: float = 0.04
    alpha: float = 5.66e-4
    beta: float = 7.58e-4
    c_x2_crit: float = 0.022
    g1_ablated: float = 968.0

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, float]) -> "PlantConstants":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"Unknown plant constants: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in values.items()})


@dataclass(frozen=True)
class CellState:
    """The eight physical states of the cell (masses in kg, temperatures in degC)."""

    x1: float
    x2: float
    x3: float
    x4: float
    x5: float
    x6: float
    x7: float
    x8: float

    def __array__(self, dtype=None, copy=None):
        return np.array([getattr(self, n) for n in STATE_NAMES], dtype=dtype or float)

    def as_array(self) -> np.ndarray:
        return np.asarray(self)

    @classmethod
    def from_array(cls, values) -> "CellState":
        values = np.asarray(values, dtype=float)
        if values.shape != (N_STATES,):
            raise ValueError(f"CellState needs {N_STATES} values, got shape {values.shape}")
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class ControlInput:
    """The five exogenous inputs."""

    u1: float
    u2: float
    u3: float
    u4: float
    u5: float

    def __post_init__(self):
        validate_control(np.asarray(self))

    def __array__(self, dtype=None, copy=None):
        return np.array([getattr(self, n) for n in INPUT_NAMES], dtype=dtype or float)

    def as_array(self) -> np.ndarray:
        return np.asarray(self)

    @classmethod
    def from_array(cls, values) -> "ControlInput":
        values = np.asarray(values, dtype=float)
        if values.shape != (N_INPUTS,):
            raise ValueError(f"ControlInput needs {N_INPUTS} values, got shape {values.shape}")
        return cls(*(float(v) for v in values))


def validate_control(u: np.ndarray) -> None:
    """Raise ValueError unless feeds/tapping are >= 0 and current/distance are > 0."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("Control input contains non-finite values")
    if np.any(u[..., [0, 2, 3]] < 0):
        raise ValueError("Feeds and tapping (u1, u3, u4) must be non-negative")
    if np.any(u[..., [1, 4]] <= 0):
        raise ValueError("Line current u2 and anode-cathode distance u5 must be positive")


DEFAULT_CONSTANTS = PlantConstants()
